#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "experiment/config.hpp"
#include "experiment/instance.hpp"

namespace teamopt::experiment {

/// Exit codes of `teamopt run` and `teamopt validate`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNotConverged = 2;

/// Everything a run produced, in memory. Trajectories are empty when the
/// solve diverged before a final sweep was possible.
struct RunOutcome {
  int exit_code = kExitOk;
  SolveReport report;
  StrategyProfile profile;
  Trajectory state;
  Trajectory adjoint;
  std::vector<Trajectory> residuals;
  Json report_json;
};

/// Solves the configured instance without touching the disk.
RunOutcome solve_experiment(const ExperimentConfig& cfg, const Instance& inst);

/// Solves and writes trajectories.csv, residuals.csv and report.json into
/// `cfg.output_dir`. Config errors propagate as ConfigError.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// Writes the artifacts of `outcome` into `dir` (created if needed).
void write_artifacts(const std::filesystem::path& dir, const RunOutcome& outcome,
                     const Instance& inst);

/// Shortest decimal form that keeps 17 significant digits.
std::string format_number(double v);

/// Header and rows of trajectories.csv.
std::string trajectories_csv(const RunOutcome& outcome, const Instance& inst);
std::string residuals_csv(const RunOutcome& outcome, const Instance& inst);

/// Human-readable findings of the structural checks; `exit_code` is kExitOk
/// when nothing was flagged.
struct ValidationOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> findings;
};

ValidationOutcome validate_experiment(const ExperimentConfig& cfg);

}  // namespace teamopt::experiment
