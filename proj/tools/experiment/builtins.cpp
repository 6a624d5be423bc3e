#include "experiment/builtins.hpp"

#include <fmt/format.h>

namespace teamopt::experiment {

namespace {

struct Entry {
  BuiltinInfo info;
  const char* config;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"p1", "scalar x' = u, l = u^2/2, phi = x^2/2, x0 = 1, T = 1; optimum u = -1/2", 0.25},
       R"json({
  "problem": {"kind": "lq", "horizon": 1.0, "x0": [1.0], "control_dims": [1],
              "B": [[1.0]], "R": [[1.0]], "M": [[1.0]]},
  "members": [{"name": "dm1", "info": {"kind": "open-loop"}}],
  "solver": {"name": "team"}
})json"},
      {{"p1d", "one-step discrete x1 = x0 + u0, l = u0^2/2, phi = x1^2/2, x0 = 1", 0.25},
       R"json({
  "problem": {"kind": "discrete-lq", "steps": 1, "x0": [1.0], "control_dims": [1],
              "A": [[1.0]], "B": [[1.0]], "R": [[1.0]], "M": [[1.0]]},
  "members": [{"name": "dm1", "info": {"kind": "open-loop"}}],
  "solver": {"name": "discrete-team"}
})json"},
      {{"lq2-decoupled", "two independent copies of p1, one decision maker each", 0.5},
       R"json({
  "problem": {"kind": "lq", "horizon": 1.0, "x0": [1.0, 1.0], "control_dims": [1, 1],
              "B": [[1.0, 0.0], [0.0, 1.0]], "R": [[1.0, 0.0], [0.0, 1.0]],
              "M": [[1.0, 0.0], [0.0, 1.0]]},
  "members": [{"name": "dm1", "observe": [0], "info": {"kind": "open-loop"}},
              {"name": "dm2", "observe": [1], "info": {"kind": "open-loop"}}],
  "solver": {"name": "lq-fixed-point"}
})json"},
      {{"lq2-coupled",
        "two subsystems with coupled dynamics, inputs and control weights; each member "
        "steers and observes its own subsystem",
        std::nullopt},
       R"json({
  "problem": {"kind": "lq", "horizon": 1.0, "x0": [1.0, -0.5], "control_dims": [1, 1],
              "A": [[-0.5, 0.4], [-0.3, 0.2]],
              "B": [[1.0, 0.2], [0.1, 1.0]],
              "H": [[1.0, 0.0], [0.0, 0.5]],
              "R": [[1.0, 0.2], [0.2, 1.5]],
              "M": [[1.0, 0.0], [0.0, 1.0]]},
  "members": [{"name": "dm1", "observe": [0], "info": {"kind": "open-loop"}},
              {"name": "dm2", "observe": [1], "info": {"kind": "open-loop"}}],
  "solver": {"name": "lq-fixed-point"}
})json"},
      {{"gnf-sin",
        "normal-form game x' = A x + w sin(x) + B u with quadratic cost; nonlinear in x",
        std::nullopt},
       R"json({
  "problem": {"kind": "gnf", "horizon": 1.0, "x0": [1.0, 0.5], "control_dims": [1, 1],
              "A": [[-0.3, 0.5], [0.0, -0.2]], "sin_weight": [0.4, 0.3],
              "B": [[1.0, 0.0], [0.3, 1.0]],
              "R": [[1.0, 0.0], [0.0, 2.0]],
              "H": [[0.5, 0.0], [0.0, 0.5]],
              "M": [[1.0, 0.0], [0.0, 1.0]]},
  "members": [{"name": "dm1", "observe": [0], "info": {"kind": "open-loop"}},
              {"name": "dm2", "observe": [1], "info": {"kind": "open-loop"}}],
  "solver": {"name": "team"}
})json"},
  };
  return table;
}

}  // namespace

const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> list = [] {
    std::vector<BuiltinInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return list;
}

std::optional<Json> builtin_config(const std::string& name) {
  for (const auto& e : entries()) {
    if (e.info.name == name) return Json::parse(e.config);
  }
  return std::nullopt;
}

std::string format_builtin_list() {
  std::string out = fmt::format("{:<15} {:>8}  {}\n", "name", "J*", "description");
  for (const auto& b : builtin_catalog()) {
    const std::string cost = b.optimal_cost ? fmt::format("{:g}", *b.optimal_cost) : "-";
    out += fmt::format("{:<15} {:>8}  {}\n", b.name, cost, b.description);
  }
  return out;
}

}  // namespace teamopt::experiment
