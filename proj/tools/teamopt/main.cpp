#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "experiment/builtins.hpp"
#include "experiment/config.hpp"
#include "experiment/runner.hpp"

namespace fs = std::filesystem;
namespace ex = teamopt::experiment;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("teamopt");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TEAMOPT_LOG")) spdlog::cfg::helpers::load_levels(env);
}

struct JobResult {
  int exit_code = ex::kExitOk;
  std::string message;
};

JobResult run_one(const fs::path& path, ex::Overrides overrides, bool nested) {
  JobResult out;
  try {
    if (nested) {
      // several configs share one base directory; give each its own
      const ex::ExperimentConfig probe = ex::load_config(path, overrides);
      overrides.output_dir = probe.output_dir / path.stem();
    }
    const ex::ExperimentConfig cfg = ex::load_config(path, overrides);
    const ex::RunOutcome r = ex::run_experiment(cfg);
    out.exit_code = r.exit_code;
    const auto& rep = r.report;
    out.message = fmt::format("{}: {} J={} rho={} iterations={} ({}) -> {}", path.string(),
                              rep.converged ? "converged" : rep.diverged ? "diverged" : "not converged",
                              ex::format_number(rep.cost), ex::format_number(rep.residual),
                              rep.iterations, rep.termination, cfg.output_dir.string());
  } catch (const ex::ConfigError& e) {
    out.exit_code = ex::kExitConfig;
    out.message = fmt::format("{}: error: {}", path.string(), e.what());
  } catch (const std::exception& e) {
    out.exit_code = ex::kExitConfig;
    out.message = fmt::format("{}: error: {}", path.string(), e.what());
  }
  return out;
}

int run_all(const std::vector<fs::path>& configs, const ex::Overrides& overrides, int jobs) {
  const bool nested = configs.size() > 1;
  std::vector<JobResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      results[i] = run_one(configs[i], overrides, nested);
    }
  };
  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(jobs), configs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = ex::kExitOk;
  for (const auto& r : results) {
    std::FILE* stream = r.exit_code == ex::kExitConfig ? stderr : stdout;
    fmt::print(stream, "{}\n", r.message);
    // config errors dominate, then non-convergence
    if (r.exit_code == ex::kExitConfig || code == ex::kExitOk) code = std::max(code, r.exit_code);
  }
  return code;
}

int validate(const fs::path& path, const ex::Overrides& overrides) {
  try {
    const auto cfg = ex::load_config(path, overrides);
    const auto v = ex::validate_experiment(cfg);
    if (v.findings.empty()) {
      fmt::print("{}: ok\n", path.string());
    } else {
      for (const auto& f : v.findings) fmt::print("{}: {}\n", path.string(), f);
    }
    return v.exit_code;
  } catch (const std::exception& e) {
    fmt::print(stderr, "{}: error: {}\n", path.string(), e.what());
    return ex::kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Team-optimal strategies for decentralized differential systems", "teamopt"};
  app.set_version_flag("--version", std::string(TEAMOPT_VERSION));
  app.require_subcommand(1);

  std::vector<fs::path> configs;
  fs::path validate_config;
  ex::Overrides overrides;
  int grid_k = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  fs::path out_dir;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Solve one or more configs and write artifacts");
  run->add_option("configs", configs, "Config files")->required()->check(CLI::ExistingFile);
  auto* k_opt = run->add_option("--grid-k", grid_k, "Override grid.K");
  auto* tol_opt = run->add_option("--tol", tol, "Override solver tolerances");
  auto* seed_opt = run->add_option("--seed", seed, "Override solver.seed");
  auto* out_opt = run->add_option("--out", out_dir, "Output directory");
  run->add_option("--jobs", jobs, "Configs solved concurrently")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "List builtin instances");

  auto* val = app.add_subcommand("validate", "Check a config and the standing assumptions");
  val->add_option("config", validate_config, "Config file")->required()->check(CLI::ExistingFile);
  auto* vk_opt = val->add_option("--grid-k", grid_k, "Override grid.K");
  auto* vseed_opt = val->add_option("--seed", seed, "Override solver.seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : ex::kExitConfig;
  }

  if (*k_opt || *vk_opt) overrides.grid_steps = grid_k;
  if (*tol_opt) overrides.tol = tol;
  if (*seed_opt || *vseed_opt) overrides.seed = seed;
  if (*out_opt) overrides.output_dir = out_dir;

  if (*list) {
    fmt::print("{}", ex::format_builtin_list());
    return 0;
  }
  if (*val) return validate(validate_config, overrides);
  return run_all(configs, overrides, jobs);
}
