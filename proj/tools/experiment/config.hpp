#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "teamopt/gnf.hpp"
#include "teamopt/team_solver.hpp"

namespace teamopt::experiment {

using Json = nlohmann::ordered_json;

/// A malformed or inconsistent configuration. `field` is a dotted path such
/// as "grid.K"; syntax errors carry a line and column instead.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  ConfigError(int line, int column, const std::string& message);

  const std::string& field() const { return field_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string field_;
  int line_ = 0;
  int column_ = 0;
};

enum class SolverKind { Team, PersonByPerson, LqFixedPoint, DiscreteTeam };

std::string to_string(SolverKind kind);

struct ExperimentConfig {
  /// Fully resolved config (builtin defaults merged in); echoed in report.json.
  Json resolved;
  /// lq | gnf | discrete-lq after builtin resolution.
  std::string problem_kind;
  /// Builtin name, empty for user-declared problems.
  std::string builtin;
  /// 0 means the default resolution for the horizon.
  int grid_steps = 0;
  SolverKind solver = SolverKind::Team;
  SolverOptions options;
  FixedPointOptions fixed_point;
  std::filesystem::path output_dir = "teamopt-out";
};

struct Overrides {
  std::optional<int> grid_steps;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

/// Parses JSON text, resolves builtins and applies overrides.
ExperimentConfig parse_config(const std::string& text, const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

}  // namespace teamopt::experiment
