#pragma once

// Command-line workflow: gen-synthetic, calibrate, train, evaluate, report.
// Every subcommand writes manifest.json into its output directory before
// producing anything else.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sacc/calibration.h"
#include "sacc/scenario.h"
#include "sacc/synthetic.h"
#include "sacc/training.h"

namespace sacc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr const char* kToolVersion = "1.0.0";

// Parses argv, runs the subcommand and maps failures to exit statuses:
// numerical failures to 3, every other input or configuration error to 2.
int run(int argc, const char* const* argv);

struct GenSyntheticOptions {
  ScenarioSpec spec;
  std::filesystem::path out = ".";
};

struct CalibrateOptions {
  std::filesystem::path data;
  std::optional<double> dt;  // resample interval
  GridSpec grid = GridSpec::defaults();
  std::vector<int> vehicles;  // empty: every vehicle behind vehicle 2
  double vehicle_length = 4.5;
  double min_spacing_floor = 0.1;
  std::size_t runner_ups = 5;
  unsigned threads = 1;
  std::filesystem::path out = ".";
};

struct TrainOptions {
  // scenario.json written by gen-synthetic; empty uses the reference
  // scenario generated in memory.
  std::filesystem::path scenario;
  std::optional<double> dt;
  TrainConfig config;
  LossWeights weights = default_weights_for(TrainConfig{}.epochs);
  std::filesystem::path out = ".";
};

struct EvaluateOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path scenario;  // empty: reference scenario
  std::optional<double> dt;
  std::uint64_t seed = 7;
  std::vector<SvoAngle> phis = {SvoAngle::egoistic(), SvoAngle::prosocial(),
                                SvoAngle::altruistic()};
  std::filesystem::path out = ".";
};

struct ReportOptions {
  std::filesystem::path dir = ".";
  std::filesystem::path out;  // empty: dir / "report"
};

void gen_synthetic(const GenSyntheticOptions& options);
void calibrate(const CalibrateOptions& options);
void train(const TrainOptions& options);
void evaluate(const EvaluateOptions& options);
void report(const ReportOptions& options);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// scenario.json names its trajectory CSV, the follower parameters and the
// simulation constants. `dt` resamples the trajectories.
Scenario load_scenario(const std::filesystem::path& json_path,
                       std::optional<double> dt = std::nullopt);

}  // namespace sacc::cli
