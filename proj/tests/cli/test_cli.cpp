#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "experiment/builtins.hpp"
#include "experiment/config.hpp"
#include "experiment/instance.hpp"
#include "experiment/runner.hpp"

namespace fs = std::filesystem;
namespace ex = teamopt::experiment;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(TEAMOPT_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

struct Cli {
  int code = -1;
  std::string out;
  std::string err;
};

Cli invoke(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + TEAMOPT_CLI_PATH + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Cli r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

ex::Json report(const fs::path& dir) { return ex::Json::parse(slurp(dir / "report.json")); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

Csv read_csv(const fs::path& path) {
  std::ifstream f(path);
  Csv csv;
  std::string line;
  std::getline(f, line);
  csv.header = split(line);
  while (std::getline(f, line)) csv.rows.push_back(split(line));
  return csv;
}

}  // namespace

TEST_CASE("run p1 with the team solver") {
  const auto dir = scratch("p1");
  spit(dir / "p1.json", R"({"problem": {"kind": "builtin", "name": "p1"}})");
  const auto r = invoke("run " + q(dir / "p1.json") + " --out " + q(dir / "out"), dir);
  CHECK(r.code == 0);
  const auto rep = report(dir / "out");
  CHECK(std::abs(rep["J"].get<double>() - 0.25) <= 1e-5);
  CHECK(rep["converged"].get<bool>());
  CHECK(rep["tool"] == "teamopt");
  CHECK(rep["config"]["problem"]["builtin"] == "p1");
  CHECK(fs::exists(dir / "out" / "trajectories.csv"));
  CHECK(fs::exists(dir / "out" / "residuals.csv"));
}

TEST_CASE("grid.K = 0 is a config error naming the field") {
  const auto dir = scratch("k0");
  spit(dir / "bad.json", R"({"problem": {"kind": "builtin", "name": "p1"}, "grid": {"K": 0}})");
  const auto r = invoke("run " + q(dir / "bad.json") + " --out " + q(dir / "out"), dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("grid.K") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("--grid-k 0 is rejected the same way") {
  const auto dir = scratch("k0flag");
  spit(dir / "p1.json", R"({"problem": {"kind": "builtin", "name": "p1"}})");
  const auto r = invoke("run " + q(dir / "p1.json") + " --grid-k 0 --out " + q(dir / "out"), dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("grid.K") != std::string::npos);
}

TEST_CASE("decoupled pair with the fixed-point solver") {
  const auto dir = scratch("decoupled");
  spit(dir / "pair.json",
       R"({"problem": {"kind": "builtin", "name": "lq2-decoupled"}, "solver": {"name": "lq-fixed-point"}})");
  const auto r = invoke("run " + q(dir / "pair.json") + " --out " + q(dir / "out"), dir);
  REQUIRE(r.code == 0);
  const Csv csv = read_csv(dir / "out" / "trajectories.csv");
  const int u1 = csv.column("u1_1");
  const int u2 = csv.column("u2_1");
  REQUIRE(u1 >= 0);
  REQUIRE(u2 >= 0);
  REQUIRE(!csv.rows.empty());
  double worst = 0.0;
  for (const auto& row : csv.rows) {
    worst = std::max(worst, std::abs(std::stod(row[static_cast<std::size_t>(u1)]) + 0.5));
    worst = std::max(worst, std::abs(std::stod(row[static_cast<std::size_t>(u2)]) + 0.5));
  }
  CHECK(worst <= 1e-3);
  CHECK(std::abs(report(dir / "out")["J"].get<double>() - 0.5) <= 1e-5);
}

TEST_CASE("list shows the builtins and is stable") {
  const auto dir = scratch("list");
  const auto a = invoke("list", dir);
  const auto b = invoke("list", dir);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("p1 ") != std::string::npos);
  CHECK(a.out.find("0.25") != std::string::npos);
  CHECK(a.out.find("lq2-coupled") != std::string::npos);
  CHECK(a.out.find("subsystems") != std::string::npos);
  for (const auto& b : ex::builtin_catalog()) CHECK(a.out.find(b.name) != std::string::npos);
}

TEST_CASE("report is reproducible apart from the timestamp") {
  const auto dir = scratch("repro");
  spit(dir / "c.json",
       R"({"problem": {"kind": "builtin", "name": "lq2-coupled"}, "solver": {"name": "team", "seed": 7},
           "grid": {"K": 100}})");
  REQUIRE(invoke("run " + q(dir / "c.json") + " --out " + q(dir / "out"), dir).code == 0);
  const std::string first = slurp(dir / "out" / "report.json");
  REQUIRE(invoke("run " + q(dir / "c.json") + " --out " + q(dir / "out"), dir).code == 0);
  const std::string second = slurp(dir / "out" / "report.json");
  auto canon = [](const std::string& text) {
    auto j = ex::Json::parse(text);
    j.erase("timestamp");
    return j.dump();
  };
  CHECK(canon(first) == canon(second));
  CHECK(ex::Json::parse(first).contains("timestamp"));
}

TEST_CASE("trajectories.csv round-trips to 1e-12") {
  const auto dir = scratch("roundtrip");
  auto cfg = ex::parse_config(R"({"problem": {"kind": "builtin", "name": "gnf-sin"}, "grid": {"K": 60}})");
  const auto inst = ex::build_instance(cfg);
  const auto outcome = ex::solve_experiment(cfg, inst);
  ex::write_artifacts(dir, outcome, inst);
  const Csv csv = read_csv(dir / "trajectories.csv");
  REQUIRE(static_cast<int>(csv.rows.size()) == outcome.state.size());
  double worst = 0.0;
  for (int k = 0; k < outcome.state.size(); ++k) {
    const auto& row = csv.rows[static_cast<std::size_t>(k)];
    std::vector<double> expected{outcome.state.time(k)};
    for (int c = 0; c < outcome.state.dim(); ++c) expected.push_back(outcome.state[k](c));
    for (int c = 0; c < outcome.adjoint.dim(); ++c) expected.push_back(outcome.adjoint[k](c));
    for (int i = 0; i < outcome.profile.size(); ++i) {
      for (int c = 0; c < outcome.profile.control(i).dim(); ++c) {
        expected.push_back(outcome.profile.control(i)[k](c));
      }
    }
    REQUIRE(row.size() == expected.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      worst = std::max(worst, std::abs(std::stod(row[j]) - expected[j]));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("syntax errors report line and column") {
  const auto dir = scratch("syntax");
  spit(dir / "broken.json", "{\n  \"problem\": {\"kind\": \"builtin\",\n    \"name\" \"p1\"}\n}\n");
  const auto r = invoke("run " + q(dir / "broken.json"), dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(r.err.find("column") != std::string::npos);
}

TEST_CASE("field errors name the offending path") {
  auto expect_field = [](const std::string& text, const std::string& field) {
    try {
      const auto cfg = ex::parse_config(text);
      ex::build_instance(cfg);
      FAIL("expected a config error for " << field);
    } catch (const ex::ConfigError& e) {
      CHECK(e.field() == field);
    }
  };
  expect_field(R"({"problem": {"kind": "builtin", "name": "nope"}})", "problem.name");
  expect_field(R"({"problem": {"kind": "lq", "x0": [1], "control_dims": [1], "B": [[1, 2]], "R": [[1]]}})",
               "problem.B");
  expect_field(R"({"problem": {"kind": "builtin", "name": "p1"}, "solver": {"name": "discrete-team"}})",
               "solver.name");
  expect_field(R"({"problem": {"kind": "builtin", "name": "p1"}, "solver": {"tol": 0}})", "solver.tol");
  expect_field(R"({"problem": {"kind": "builtin", "name": "lq2-coupled"}, "members": [{"name": "a"}]})",
               "members");
  expect_field(R"({"problem": {"kind": "builtin", "name": "lq2-coupled"},
                   "members": [{"observe": [2]}, {"observe": [1]}]})",
               "members[0].observe[0]");
}

TEST_CASE("discrete builtin p1d") {
  const auto cfg = ex::parse_config(R"({"problem": {"kind": "builtin", "name": "p1d"}})");
  const auto inst = ex::build_instance(cfg);
  const auto outcome = ex::solve_experiment(cfg, inst);
  CHECK(outcome.exit_code == 0);
  CHECK(outcome.report.cost == doctest::Approx(0.25).epsilon(1e-12));
  const std::string csv = ex::trajectories_csv(outcome, inst);
  // controls live on steps 0..T-1; the terminal row leaves them empty
  CHECK(csv.substr(csv.rfind('\n', csv.size() - 2) + 1).back() == '\n');
  CHECK(csv.find(",\n") != std::string::npos);
}

TEST_CASE("time tables and feedback members") {
  const auto cfg = ex::parse_config(R"({
    "problem": {"kind": "lq", "horizon": 1.0, "x0": [1.0], "control_dims": [1],
                "A": {"t": [0.0, 1.0], "values": [[[0.0]], [[-1.0]]]},
                "B": [[1.0]], "R": [[1.0]], "M": [[1.0]],
                "m": {"t": [0.0, 1.0], "values": [[0.0], [0.2]]}},
    "members": [{"info": {"kind": "polynomial", "degree": 1},
                 "box": {"lower": [-0.45], "upper": [null]}}],
    "grid": {"K": 80}, "solver": {"certificate_samples": 0}})");
  const auto inst = ex::build_instance(cfg);
  CHECK(inst.lq->A(0.5)(0, 0) == doctest::Approx(-0.5));
  CHECK(inst.lq->m(0.25)(0) == doctest::Approx(0.05));
  const auto outcome = ex::solve_experiment(cfg, inst);
  CHECK(outcome.exit_code == 0);
  for (int k = 0; k < outcome.profile.nodes(); ++k) {
    CHECK(outcome.profile.control(0)[k](0) >= -0.45 - 1e-12);
  }
}

TEST_CASE("feedback member on the observed state") {
  const auto cfg = ex::parse_config(R"({
    "problem": {"kind": "builtin", "name": "lq2-coupled"},
    "members": [{"observe": [0], "info": {"kind": "feedback", "features": ["1", "y", "mean"]}},
                {"observe": [1], "info": {"kind": "markov"}}],
    "solver": {"name": "team", "certificate_samples": 0}, "grid": {"K": 100}})");
  const auto inst = ex::build_instance(cfg);
  CHECK(inst.members[0].observation_dim == 1);
  const auto outcome = ex::solve_experiment(cfg, inst);
  CHECK(outcome.exit_code == 0);
  CHECK(outcome.profile.members[0].coefficients.size() == 3);
  CHECK(outcome.profile.members[1].coefficients.size() == 2);
}

TEST_CASE("divergence exits 2 and still writes the report") {
  const auto dir = scratch("diverge");
  spit(dir / "blow.json", R"({"problem": {"kind": "gnf", "horizon": 1.0, "x0": [1.0], "control_dims": [1],
                              "A": [[10000.0]], "B": [[1.0]], "R": [[1.0]], "M": [[1.0]]},
                              "grid": {"K": 100}})");
  const auto r = invoke("run " + q(dir / "blow.json") + " --out " + q(dir / "out"), dir);
  CHECK(r.code == 2);
  const auto rep = report(dir / "out");
  CHECK(rep["diverged"].get<bool>());
  CHECK(rep["termination"].get<std::string>().find("diverged") != std::string::npos);
}

TEST_CASE("several configs with --jobs get their own directories") {
  const auto dir = scratch("jobs");
  spit(dir / "a.json", R"({"problem": {"kind": "builtin", "name": "p1"}, "grid": {"K": 50}})");
  spit(dir / "b.json", R"({"problem": {"kind": "builtin", "name": "p1d"}})");
  const auto r = invoke("run " + q(dir / "a.json") + " " + q(dir / "b.json") + " --jobs 2 --out " +
                             q(dir / "out"),
                         dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "a" / "report.json"));
  CHECK(fs::exists(dir / "out" / "b" / "report.json"));
}

TEST_CASE("validate") {
  const auto dir = scratch("validate");
  spit(dir / "ok.json", R"({"problem": {"kind": "builtin", "name": "gnf-sin"}})");
  const auto ok = invoke("validate " + q(dir / "ok.json"), dir);
  CHECK(ok.code == 0);
  CHECK(ok.out.find("ok") != std::string::npos);

  spit(dir / "bad.json", R"({"problem": {"kind": "lq", "x0": [1], "control_dims": [1], "B": [[1]], "R": [[-1]]}})");
  const auto bad = invoke("validate " + q(dir / "bad.json"), dir);
  CHECK(bad.code == 1);
}
