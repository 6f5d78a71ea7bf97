#pragma once

#include "arx/mc.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace arx {

struct OutputOptions {
  std::string directory = ".";
  std::vector<std::string> formats{"csv", "json"};
  bool wants(std::string_view format) const;
};

/// Experiment description read from a flat `key = value` file:
///
///   model.d = 2
///   model.A1 = 2 0; 0 0        # rows separated by ';'
///   run.N = 1000
///
/// Every field is validated at parse time; errors name the offending key.
struct ExperimentConfig {
  ArxModel model;
  std::int64_t horizon = 1000;
  int runs = 1;
  std::uint64_t seed = 0;
  EstimatorOptions estimator{};
  Trajectory trajectory{};
  bool excitation_on = true;
  int record_stride = 1;
  int workers = 1;
  std::optional<Matrix> theta0{};
  OutputOptions output{};
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(echo_config(c)) reproduces c exactly.
std::string echo_config(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

SimConfig to_sim_config(const ExperimentConfig& config);
mc::EnsembleConfig to_ensemble_config(const ExperimentConfig& config);

}  // namespace arx
