#include "experiment/runner.hpp"

#include <chrono>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teamopt/errors.hpp"

#ifndef TEAMOPT_VERSION
#define TEAMOPT_VERSION "0.0.0"
#endif

namespace teamopt::experiment {

namespace {

SolveReport diverged(const std::exception& e) {
  SolveReport r;
  r.diverged = true;
  r.cost = kInfinity;
  r.residual = kInfinity;
  r.termination = std::string("diverged: ") + e.what();
  return r;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json certificate_json(const SolveReport& r) {
  if (!r.has_certificate) return nullptr;
  const auto& ev = r.certificate.evidence;
  Json c = Json::object();
  c["holds"] = r.certificate.holds;
  c["hamiltonian_convex"] = ev.hamiltonian_convex;
  c["terminal_convex"] = ev.terminal_convex;
  c["perturbations_passed"] = ev.perturbations_passed;
  c["convexity_samples"] = ev.convexity_samples;
  c["worst_hamiltonian_gap"] = number_or_null(ev.worst_hamiltonian_gap);
  c["worst_terminal_gap"] = number_or_null(ev.worst_terminal_gap);
  c["perturbations"] = ev.perturbations;
  c["min_cost_gap"] = number_or_null(ev.min_cost_gap);
  return c;
}

std::string timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                     fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

Json report_json(const ExperimentConfig& cfg, const Instance& inst, const SolveReport& r) {
  Json j = Json::object();
  j["tool"] = "teamopt";
  j["version"] = TEAMOPT_VERSION;
  j["config"] = cfg.resolved;
  j["solver"] = to_string(cfg.solver);
  Json grid = Json::object();
  if (inst.discrete) {
    grid["steps"] = inst.discrete_problem.steps;
  } else {
    grid["K"] = inst.grid->steps();
    grid["horizon"] = inst.grid->horizon();
  }
  j["grid"] = grid;
  j["J"] = number_or_null(r.cost);
  j["rho"] = number_or_null(r.residual);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["diverged"] = r.diverged;
  j["termination"] = r.termination;
  Json members = Json::array();
  for (std::size_t i = 0; i < inst.members.size(); ++i) {
    Json m = Json::object();
    m["name"] = inst.members[i].name;
    m["rho"] = i < r.member_residuals.size() ? number_or_null(r.member_residuals[i]) : Json(nullptr);
    members.push_back(m);
  }
  j["member_residuals"] = members;
  if (!r.cycle_steps.empty()) j["cycle_steps"] = r.cycle_steps;
  j["certificate"] = certificate_json(r);
  j["warnings"] = r.warnings;
  j["timestamp"] = timestamp();
  return j;
}

std::pair<StrategyProfile, SolveReport> dispatch(const ExperimentConfig& cfg, const Instance& inst) {
  if (inst.discrete) {
    const DiscreteModel model(inst.discrete_problem);
    const StrategyProfile init = default_profile(model);
    if (cfg.solver == SolverKind::PersonByPerson) {
      auto result = block_descent(model, init, cfg.options);
      if (result.second.converged && cfg.options.certificate_samples > 0) {
        result.second.certificate =
            certify(model, result.first, cfg.options.certificate_samples, cfg.options.seed);
        result.second.has_certificate = true;
      }
      return result;
    }
    return discrete_solve_team(inst.discrete_problem, init, cfg.options);
  }

  const TimeGrid& grid = *inst.grid;
  const ContinuousModel model(inst.continuous, grid);
  switch (cfg.solver) {
    case SolverKind::PersonByPerson:
      return solve_pbp(inst.continuous, default_profile(model), grid, cfg.options);
    case SolverKind::LqFixedPoint: {
      auto result = inst.lq ? [&] {
        auto sol = solve_decentralized_lq(*inst.lq, inst.members, grid, cfg.fixed_point);
        return std::make_pair(std::move(sol.profile), std::move(sol.report));
      }()
                            : solve_gnf_fixed_point(*inst.gnf, inst.members, grid, cfg.fixed_point);
      if (result.second.converged && cfg.options.certificate_samples > 0) {
        result.second.certificate = sufficiency_certificate(
            inst.continuous, result.first, grid, cfg.options.certificate_samples, cfg.options.seed);
        result.second.has_certificate = true;
      }
      return result;
    }
    default:
      return solve_team(inst.continuous, default_profile(model), grid, cfg.options);
  }
}

// Final sweep at the returned profile for the CSV artifacts.
void fill_paths(const Instance& inst, RunOutcome& out) {
  std::unique_ptr<SweepModel> model;
  if (inst.discrete) {
    model = std::make_unique<DiscreteModel>(inst.discrete_problem);
  } else {
    model = std::make_unique<ContinuousModel>(inst.continuous, *inst.grid);
  }
  const Sweep s = model->sweep(out.profile);
  const auto stat = stationarity_from_sweep(*model, out.profile, s, build_subspaces(*model, s.state));
  out.state = s.state;
  out.adjoint = s.adjoint;
  out.residuals = stat.residuals;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

RunOutcome solve_experiment(const ExperimentConfig& cfg, const Instance& inst) {
  RunOutcome out;
  spdlog::info("solving {} problem with {}", cfg.problem_kind, to_string(cfg.solver));
  try {
    auto [profile, report] = dispatch(cfg, inst);
    out.profile = std::move(profile);
    out.report = std::move(report);
  } catch (const IntegrationError& e) {
    out.report = diverged(e);
  } catch (const EvaluationError& e) {
    out.report = diverged(e);
  }
  if (!out.report.diverged && out.profile.size() > 0) {
    try {
      fill_paths(inst, out);
    } catch (const IntegrationError& e) {
      out.report = diverged(e);
    } catch (const EvaluationError& e) {
      out.report = diverged(e);
    }
  }
  for (const auto& w : out.report.warnings) spdlog::warn("{}", w);
  if (out.report.diverged) {
    spdlog::warn("{}", out.report.termination);
  } else {
    spdlog::info("J = {} rho = {} after {} iterations ({})", out.report.cost, out.report.residual,
                 out.report.iterations, out.report.termination);
  }
  out.exit_code = out.report.converged && !out.report.diverged ? kExitOk : kExitNotConverged;
  out.report_json = report_json(cfg, inst, out.report);
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const Instance inst = build_instance(cfg);
  RunOutcome out = solve_experiment(cfg, inst);
  write_artifacts(cfg.output_dir, out, inst);
  return out;
}

std::string trajectories_csv(const RunOutcome& out, const Instance& inst) {
  if (out.state.size() == 0) return {};
  const int n = out.state.dim();
  std::string text = "t";
  for (int c = 1; c <= n; ++c) text += fmt::format(",x_{}", c);
  for (int c = 1; c <= n; ++c) text += fmt::format(",psi_{}", c);
  for (std::size_t i = 0; i < inst.members.size(); ++i) {
    for (int c = 1; c <= inst.members[i].control_dim; ++c) text += fmt::format(",u{}_{}", i + 1, c);
  }
  text += '\n';
  for (int k = 0; k < out.state.size(); ++k) {
    text += format_number(out.state.time(k));
    const Vector x = out.state[k];
    const Vector psi = out.adjoint[k];
    for (int c = 0; c < n; ++c) text += "," + format_number(x(c));
    for (int c = 0; c < n; ++c) text += "," + format_number(psi(c));
    const bool has_control = k < out.profile.nodes();
    for (int i = 0; i < out.profile.size(); ++i) {
      const int d = out.profile.control(i).dim();
      if (has_control) {
        const Vector u = out.profile.control(i)[k];
        for (int c = 0; c < d; ++c) text += "," + format_number(u(c));
      } else {
        text.append(static_cast<std::size_t>(d), ',');
      }
    }
    text += '\n';
  }
  return text;
}

std::string residuals_csv(const RunOutcome& out, const Instance& inst) {
  if (out.residuals.empty()) return {};
  std::string text = "t";
  for (std::size_t i = 0; i < inst.members.size(); ++i) {
    for (int c = 1; c <= inst.members[i].control_dim; ++c) text += fmt::format(",r{}_{}", i + 1, c);
  }
  text += '\n';
  const Trajectory& first = out.residuals.front();
  for (int k = 0; k < first.size(); ++k) {
    text += format_number(first.time(k));
    for (const auto& r : out.residuals) {
      const Vector v = r[k];
      for (int c = 0; c < v.size(); ++c) text += "," + format_number(v(c));
    }
    text += '\n';
  }
  return text;
}

void write_artifacts(const std::filesystem::path& dir, const RunOutcome& out, const Instance& inst) {
  std::filesystem::create_directories(dir);
  if (out.state.size() > 0) {
    write_file(dir / "trajectories.csv", trajectories_csv(out, inst));
    write_file(dir / "residuals.csv", residuals_csv(out, inst));
  }
  write_file(dir / "report.json", out.report_json.dump(2) + "\n");
  spdlog::debug("artifacts written to {}", dir.string());
}

ValidationOutcome validate_experiment(const ExperimentConfig& cfg) {
  ValidationOutcome out;
  const Instance inst = build_instance(cfg);
  try {
    if (inst.discrete) {
      inst.discrete_problem.check_structure();
      discrete_forward(inst.discrete_problem, default_profile(DiscreteModel(inst.discrete_problem)));
    } else {
      ValidationOptions opts;
      opts.seed = cfg.options.seed;
      const auto report = validate_problem(inst.continuous, opts);
      for (const auto& v : report.violations) {
        std::string who = v.member >= 0 ? " [" + inst.members[static_cast<std::size_t>(v.member)].name + "]" : "";
        out.findings.push_back(v.check + who + ": " + v.detail);
      }
    }
  } catch (const StructuralError& e) {
    throw ConfigError("problem", e.what());
  } catch (const Error& e) {
    out.findings.push_back(e.what());
  }
  out.exit_code = out.findings.empty() ? kExitOk : kExitNotConverged;
  return out;
}

}  // namespace teamopt::experiment
