#pragma once

#include <optional>
#include <vector>

#include "experiment/config.hpp"
#include "teamopt/discrete.hpp"
#include "teamopt/gnf.hpp"
#include "teamopt/lq.hpp"

namespace teamopt::experiment {

/// A problem built from a resolved config. Continuous instances carry the
/// grid and, when the source allows it, the LQ or GNF data behind them.
struct Instance {
  bool discrete = false;
  std::vector<DecisionMaker> members;

  std::optional<TimeGrid> grid;
  std::optional<LQData> lq;
  std::optional<GnfData> gnf;
  TeamProblem continuous;

  DiscreteTeamProblem discrete_problem;
};

/// Throws ConfigError for missing or ill-shaped fields.
Instance build_instance(const ExperimentConfig& cfg);

}  // namespace teamopt::experiment
