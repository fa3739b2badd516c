#include "sacc/ingest.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "sacc/errors.h"

namespace sacc {
namespace {

constexpr const char* kHeader[] = {"time_s", "vehicle_id", "speed_mps",
                                   "spacing_m"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_number(std::string_view cell, const char* column,
                    std::size_t row) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(fmt::format("cannot parse {} '{}'", column, cell), row);
  }
  if (!std::isfinite(value)) {
    throw ParseError(fmt::format("non-finite {}", column), row);
  }
  return value;
}

// Keeps 12 significant digits so that an interval recovered from decimal
// timestamps lands back on the value that was written.
double snap_interval(double dt) {
  return std::stod(fmt::format("{:.12g}", dt));
}

struct RawSeries {
  int vehicle_id = 0;
  std::vector<double> times, speeds, spacings;
  std::vector<std::size_t> rows;
  bool has_spacing = false;
};

// (1 - f) a + f b keeps both endpoints exact.
double lerp(double a, double b, double f) { return (1.0 - f) * a + f * b; }

TrajectorySeries interpolate(int vehicle_id, std::span<const double> times,
                             std::span<const double> speeds,
                             const std::vector<double>* spacings,
                             double dt_out) {
  const std::size_t n = times.size();
  const double t0 = times.front();
  const double span = times.back() - t0;
  if (!(dt_out > 0.0) || !std::isfinite(dt_out)) {
    throw ConfigError("resample interval must be > 0");
  }
  if (dt_out > span * (1.0 + 1e-12)) {
    throw ConfigError(fmt::format(
        "resample interval {} exceeds the series span {}", dt_out, span));
  }
  const auto count =
      static_cast<std::size_t>(std::floor(span / dt_out + 1e-9)) + 1;

  TrajectorySeries out;
  out.vehicle_id = vehicle_id;
  out.dt = dt_out;
  out.t0 = t0;
  out.speeds.resize(count);
  if (spacings) out.spacings.emplace(count);

  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = std::min(t0 + static_cast<double>(k) * dt_out, times.back());
    while (j + 2 < n && times[j + 1] <= t) ++j;
    const double width = times[j + 1] - times[j];
    double f = width > 0.0 ? (t - times[j]) / width : 0.0;
    f = std::clamp(f, 0.0, 1.0);
    if (k + 1 == count && std::abs(t - times.back()) <= 1e-9 * std::max(1.0, span)) {
      j = n - 2;
      f = 1.0;
    }
    out.speeds[k] = lerp(speeds[j], speeds[j + 1], f);
    if (spacings) (*out.spacings)[k] = lerp((*spacings)[j], (*spacings)[j + 1], f);
  }
  return out;
}

TrajectorySeries finish(RawSeries& raw, const CsvOptions& options) {
  const std::size_t n = raw.times.size();
  if (n < 2) {
    throw ParseError(fmt::format("vehicle {} has fewer than two samples",
                                 raw.vehicle_id),
                     raw.rows.front());
  }
  TrajectorySeries series;
  if (options.resample_dt) {
    series = interpolate(raw.vehicle_id, raw.times, raw.speeds,
                         raw.has_spacing ? &raw.spacings : nullptr,
                         *options.resample_dt);
  } else {
    const double reference = raw.times[1] - raw.times[0];
    const double tol = 1e-6 * reference + 1e-9;
    for (std::size_t k = 1; k < n; ++k) {
      const double step = raw.times[k] - raw.times[k - 1];
      if (std::abs(step - reference) > tol) {
        throw ParseError(
            fmt::format("non-uniform sampling for vehicle {}: interval {} "
                        "where {} expected",
                        raw.vehicle_id, step, reference),
            raw.rows[k]);
      }
    }
    series.vehicle_id = raw.vehicle_id;
    series.t0 = raw.times.front();
    series.dt = snap_interval((raw.times.back() - raw.times.front()) /
                              static_cast<double>(n - 1));
    series.speeds = std::move(raw.speeds);
    if (raw.has_spacing) series.spacings = std::move(raw.spacings);
  }
  const auto check = validate_trajectory(series);
  if (!check.ok()) {
    const auto& v = check.violations.front();
    const std::size_t row =
        v.index && *v.index < raw.rows.size() ? raw.rows[*v.index] : raw.rows.front();
    throw ParseError(fmt::format("vehicle {} violates '{}'", raw.vehicle_id,
                                 v.invariant),
                     row);
  }
  return series;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<TrajectorySeries> parse_csv(const std::string& text,
                                        const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;

  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++row;
  const auto header = split(line);
  if (header.size() != 4) {
    throw ParseError(fmt::format("expected 4 columns, header has {}",
                                 header.size()), row);
  }
  for (std::size_t c = 0; c < 4; ++c) {
    if (header[c] != kHeader[c]) {
      throw ParseError(fmt::format("missing column '{}'", kHeader[c]), row);
    }
  }

  std::map<int, RawSeries> by_vehicle;
  int current = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 4) {
      throw ParseError(fmt::format("expected 4 cells, found {}", cells.size()),
                       row);
    }
    const double t = parse_number(cells[0], "time_s", row);
    int id = 0;
    {
      auto [ptr, ec] = std::from_chars(cells[1].data(),
                                       cells[1].data() + cells[1].size(), id);
      if (ec != std::errc() || ptr != cells[1].data() + cells[1].size()) {
        throw ParseError(fmt::format("cannot parse vehicle_id '{}'", cells[1]),
                         row);
      }
    }
    const double v = parse_number(cells[2], "speed_mps", row);

    auto [it, inserted] = by_vehicle.try_emplace(id);
    RawSeries& raw = it->second;
    if (inserted) {
      raw.vehicle_id = id;
      raw.has_spacing = !cells[3].empty();
    } else if (!any || current != id) {
      throw ParseError(fmt::format("rows of vehicle {} are not contiguous", id),
                       row);
    }
    any = true;
    current = id;

    if (!raw.times.empty() && !(t > raw.times.back())) {
      throw ParseError(fmt::format("time {} does not increase for vehicle {}",
                                   t, id),
                       row);
    }
    if (raw.has_spacing != !cells[3].empty()) {
      throw ParseError(fmt::format("vehicle {} mixes empty and filled spacing",
                                   id),
                       row);
    }
    raw.times.push_back(t);
    raw.speeds.push_back(v);
    raw.rows.push_back(row);
    if (raw.has_spacing) raw.spacings.push_back(parse_number(cells[3], "spacing_m", row));
  }
  if (by_vehicle.empty()) throw ParseError("no data rows", row);

  std::vector<TrajectorySeries> out;
  for (auto& [id, raw] : by_vehicle) out.push_back(finish(raw, options));
  return out;
}

std::vector<TrajectorySeries> load_csv(const std::filesystem::path& path,
                                       const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

std::string format_csv(std::span<const TrajectorySeries> series) {
  std::string out = "time_s,vehicle_id,speed_mps,spacing_m\n";
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      out += format_double(s.time_at(k));
      out += ',';
      out += std::to_string(s.vehicle_id);
      out += ',';
      out += format_double(s.speeds[k]);
      out += ',';
      if (s.spacings) out += format_double((*s.spacings)[k]);
      out += '\n';
    }
  }
  return out;
}

void save_csv(const std::filesystem::path& path,
              std::span<const TrajectorySeries> series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_csv(series);
  if (!out) throw IoError("write failed for " + path.string());
}

TrajectorySeries resample(const TrajectorySeries& series, double dt_out) {
  if (series.size() < 2) throw ShapeError("resample needs >= 2 samples");
  std::vector<double> times(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) times[k] = series.time_at(k);
  return interpolate(series.vehicle_id, times, series.speeds,
                     series.spacings ? &*series.spacings : nullptr, dt_out);
}

TrajectorySeries smooth(const TrajectorySeries& series, int window) {
  const auto n = static_cast<long>(series.size());
  if (window < 1 || window % 2 == 0) {
    throw ConfigError(fmt::format("smoothing window must be odd and >= 1, got {}",
                                  window));
  }
  if (window > n) {
    throw ConfigError(fmt::format("smoothing window {} exceeds series length {}",
                                  window, n));
  }
  const long radius = window / 2;
  auto average = [&](const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (long k = 0; k < n; ++k) {
      const long lo = std::max(0L, k - radius);
      const long hi = std::min(n - 1, k + radius);
      double sum = 0.0;
      for (long j = lo; j <= hi; ++j) sum += x[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(k)] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
  };
  if (window == 1) return series;
  TrajectorySeries out = series;
  out.speeds = average(series.speeds);
  if (series.spacings) out.spacings = average(*series.spacings);
  return out;
}

}  // namespace sacc
