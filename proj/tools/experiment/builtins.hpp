#pragma once

#include <optional>
#include <string>
#include <vector>

#include "experiment/config.hpp"

namespace teamopt::experiment {

struct BuiltinInfo {
  std::string name;
  std::string description;
  /// Known optimal cost, when there is a closed form.
  std::optional<double> optimal_cost;
};

/// Builtins in listing order.
const std::vector<BuiltinInfo>& builtin_catalog();

/// Base config of a builtin (problem, members, default solver); nullopt when
/// the name is unknown.
std::optional<Json> builtin_config(const std::string& name);

/// Table printed by `teamopt list`.
std::string format_builtin_list();

}  // namespace teamopt::experiment
