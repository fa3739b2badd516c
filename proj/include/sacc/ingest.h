#pragma once

// Trajectory CSV I/O and light preprocessing.
//
// Schema (header required, comma separated):
//   time_s,vehicle_id,speed_mps,spacing_m
// spacing_m is empty for the platoon leader. Rows are grouped by vehicle
// with ascending time and a uniform interval per vehicle.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sacc/core_model.h"

namespace sacc {

struct CsvOptions {
  // When set, non-uniform input is accepted and every vehicle is linearly
  // interpolated onto this interval.
  std::optional<double> resample_dt;
};

// One validated series per vehicle id, ordered by id. Throws ParseError
// naming the offending row, IoError when the file cannot be read.
std::vector<TrajectorySeries> load_csv(const std::filesystem::path& path,
                                       const CsvOptions& options = {});
std::vector<TrajectorySeries> parse_csv(const std::string& text,
                                        const CsvOptions& options = {});

// Writes the same schema; values use the shortest round-trip decimal form.
void save_csv(const std::filesystem::path& path,
              std::span<const TrajectorySeries> series);
std::string format_csv(std::span<const TrajectorySeries> series);

// Linear interpolation onto t0 + k dt_out within the original span.
// Throws ConfigError when dt_out exceeds the span.
TrajectorySeries resample(const TrajectorySeries& series, double dt_out);

// Centered moving average over speeds and spacings. Near the ends the
// window shrinks to the samples that exist.
TrajectorySeries smooth(const TrajectorySeries& series, int window);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace sacc
