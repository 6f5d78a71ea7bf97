#pragma once

#include "arx/config.hpp"

#include <filesystem>
#include <iosfwd>

namespace arx::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitSelftest = 4;

/// Entry point of the `arxpe` tool. Subcommands: limit-matrix, simulate,
/// montecarlo, selftest.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes limit_matrix.csv / limit_matrix.json (and series.csv on request).
void cmd_limit_matrix(const ExperimentConfig& config, const std::filesystem::path& dir,
                      bool series_csv, std::ostream& log);

/// Writes trace.csv / simulate.json.
void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& dir,
                  bool verbose, std::ostream& log);

/// Writes ensemble.json / z_matrix.csv (and ablation.csv with `ablation`).
void cmd_montecarlo(const ExperimentConfig& config, const std::filesystem::path& dir,
                    bool ablation, std::ostream& log);

/// Fast internal consistency checks; returns kExitOk or kExitSelftest.
int cmd_selftest(std::ostream& log);

}  // namespace arx::app
