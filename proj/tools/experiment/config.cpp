#include "experiment/config.hpp"

#include <fstream>
#include <sstream>

#include "experiment/builtins.hpp"
#include "experiment/fields.hpp"

namespace teamopt::experiment {

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

ConfigError::ConfigError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Team: return "team";
    case SolverKind::PersonByPerson: return "pbp";
    case SolverKind::LqFixedPoint: return "lq-fixed-point";
    case SolverKind::DiscreteTeam: return "discrete-team";
  }
  return "?";
}

namespace {

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte is 1-based and points just past the offending character
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1, column = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    // drop the library's own prefix and position, which count differently
    if (auto pos = what.find("column "); pos != std::string::npos) {
      if (auto colon = what.find(": ", pos); colon != std::string::npos) what = what.substr(colon + 2);
    }
    throw ConfigError(line, column, what);
  }
}

SolverKind parse_solver(const std::string& name) {
  if (name == "team") return SolverKind::Team;
  if (name == "pbp") return SolverKind::PersonByPerson;
  if (name == "lq-fixed-point") return SolverKind::LqFixedPoint;
  if (name == "discrete-team") return SolverKind::DiscreteTeam;
  throw ConfigError("solver.name",
                    "unknown solver '" + name + "' (team | pbp | lq-fixed-point | discrete-team)");
}

Json resolve_builtin(const Json& root, std::string& builtin) {
  const Json& problem = fields::require(root, "", "problem");
  fields::expect_object(problem, "problem");
  const std::string kind = fields::string(problem, "problem", "kind", "");
  if (kind.empty()) throw ConfigError("problem.kind", "required field is missing");
  if (kind != "builtin") return root;

  builtin = fields::string(problem, "problem", "name", "");
  if (builtin.empty()) throw ConfigError("problem.name", "builtin problems need a name");
  auto base = builtin_config(builtin);
  if (!base) {
    throw ConfigError("problem.name", "unknown builtin '" + builtin + "' (see `teamopt list`)");
  }
  Json patch = root;
  patch.erase("problem");
  base->merge_patch(patch);
  (*base)["problem"]["builtin"] = builtin;
  return *base;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const Overrides& overrides) {
  const Json parsed = parse_json(text);
  if (!parsed.is_object()) throw ConfigError(1, 1, "top level must be an object");

  ExperimentConfig cfg;
  Json root = resolve_builtin(parsed, cfg.builtin);
  const Json& problem = root["problem"];
  cfg.problem_kind = fields::string(problem, "problem", "kind", "");
  if (cfg.problem_kind != "lq" && cfg.problem_kind != "gnf" && cfg.problem_kind != "discrete-lq") {
    throw ConfigError("problem.kind", "unknown kind '" + cfg.problem_kind +
                                          "' (lq | gnf | builtin | discrete-lq)");
  }
  const bool discrete = cfg.problem_kind == "discrete-lq";

  if (const Json* grid = fields::find(root, "grid")) {
    fields::expect_object(*grid, "grid");
    if (const Json* k = fields::find(*grid, "K")) {
      const long long steps = fields::integer(*k, "grid.K");
      if (steps < 1) {
        throw ConfigError("grid.K", "must be an integer >= 1, got " + std::to_string(steps));
      }
      cfg.grid_steps = static_cast<int>(steps);
    }
  }
  if (overrides.grid_steps) {
    if (*overrides.grid_steps < 1) {
      throw ConfigError("grid.K", "must be an integer >= 1, got " +
                                      std::to_string(*overrides.grid_steps) + " (from --grid-k)");
    }
    cfg.grid_steps = *overrides.grid_steps;
    root["grid"]["K"] = cfg.grid_steps;
  }

  Json solver = root.contains("solver") ? root["solver"] : Json::object();
  fields::expect_object(solver, "solver");
  cfg.solver = parse_solver(fields::string(solver, "solver", "name", discrete ? "discrete-team" : "team"));
  auto& o = cfg.options;
  o.tol = fields::number(solver, "solver", "tol", o.tol);
  o.cost_tol = fields::number(solver, "solver", "cost_tol", o.cost_tol);
  o.max_iterations = static_cast<int>(fields::integer(solver, "solver", "max_iterations", o.max_iterations));
  o.max_cycles = static_cast<int>(fields::integer(solver, "solver", "max_cycles", o.max_cycles));
  o.certificate_samples = static_cast<int>(
      fields::integer(solver, "solver", "certificate_samples", o.certificate_samples));
  o.seed = static_cast<std::uint64_t>(fields::integer(solver, "solver", "seed", static_cast<long long>(o.seed)));
  if (overrides.tol) o.tol = *overrides.tol;
  if (overrides.seed) o.seed = *overrides.seed;
  if (!(o.tol > 0.0)) throw ConfigError("solver.tol", "must be > 0");
  if (!(o.cost_tol >= 0.0)) throw ConfigError("solver.cost_tol", "must be >= 0");
  if (o.max_iterations < 1) throw ConfigError("solver.max_iterations", "must be >= 1");
  if (o.max_cycles < 1) throw ConfigError("solver.max_cycles", "must be >= 1");
  if (o.certificate_samples < 0) throw ConfigError("solver.certificate_samples", "must be >= 0");

  auto& fp = cfg.fixed_point;
  fp.damping = fields::number(solver, "solver", "damping", fp.damping);
  fp.max_iterations = o.max_iterations;
  // the fixed point measures iterate gaps, so its default is tighter than rho's
  fp.tol = fields::number(solver, "solver", "gap_tol", fp.tol);
  if (overrides.tol) fp.tol = *overrides.tol;
  if (!(fp.damping > 0.0 && fp.damping <= 1.0)) throw ConfigError("solver.damping", "must lie in (0, 1]");
  if (!(fp.tol > 0.0)) throw ConfigError("solver.gap_tol", "must be > 0");

  solver["name"] = to_string(cfg.solver);
  if (overrides.tol) solver["tol"] = o.tol;
  if (overrides.seed) solver["seed"] = o.seed;
  root["solver"] = solver;

  if (discrete && cfg.solver == SolverKind::LqFixedPoint) {
    throw ConfigError("solver.name", "lq-fixed-point needs a continuous lq or gnf problem");
  }
  if (!discrete && cfg.solver == SolverKind::DiscreteTeam) {
    throw ConfigError("solver.name", "discrete-team needs a discrete-lq problem");
  }

  if (const Json* out = fields::find(root, "output")) {
    fields::expect_object(*out, "output");
    cfg.output_dir = fields::string(*out, "output", "dir", cfg.output_dir.string());
  }
  if (overrides.output_dir) {
    cfg.output_dir = *overrides.output_dir;
    root["output"]["dir"] = cfg.output_dir.string();
  }

  cfg.resolved = std::move(root);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides);
}

}  // namespace teamopt::experiment
