#include "teamopt/profile.hpp"

#include "teamopt/errors.hpp"

namespace teamopt {

int StrategyProfile::control_dim() const {
  int d = 0;
  for (const auto& m : members) d += m.control.dim();
  return d;
}

int StrategyProfile::nodes() const { return members.empty() ? 0 : members.front().control.size(); }

Vector StrategyProfile::stacked(int k) const {
  Vector u(control_dim());
  int offset = 0;
  for (const auto& m : members) {
    u.segment(offset, m.control.dim()) = m.control.values().row(k).transpose();
    offset += m.control.dim();
  }
  return u;
}

Vector StrategyProfile::stacked_midpoint(int k) const {
  const int last = nodes() - 1;
  if (last < 3) return 0.5 * (stacked(k) + stacked(k + 1));
  // 4-point cubic through the neighbouring nodes, one-sided at the ends
  if (k == 0) {
    return (5.0 * stacked(0) + 15.0 * stacked(1) - 5.0 * stacked(2) + stacked(3)) / 16.0;
  }
  if (k == last - 1) {
    return (stacked(last - 3) - 5.0 * stacked(last - 2) + 15.0 * stacked(last - 1) +
            5.0 * stacked(last)) /
           16.0;
  }
  return (9.0 * (stacked(k) + stacked(k + 1)) - stacked(k - 1) - stacked(k + 2)) / 16.0;
}

Trajectory StrategyProfile::stacked() const {
  if (members.empty()) return {};
  Matrix values(nodes(), control_dim());
  int offset = 0;
  for (const auto& m : members) {
    values.middleCols(offset, m.control.dim()) = m.control.values();
    offset += m.control.dim();
  }
  const auto times = members.front().control.times();
  return {std::vector<double>(times.begin(), times.end()), std::move(values)};
}

StrategyProfile open_loop_profile(std::vector<Trajectory> controls) {
  StrategyProfile out;
  for (auto& c : controls) {
    if (!out.members.empty() && !c.same_times(out.members.front().control)) {
      throw StructuralError("strategy profile: member controls on different nodes");
    }
    out.members.push_back({Vector(), std::move(c)});
  }
  return out;
}

StrategyProfile constant_profile(const TimeGrid& grid, const std::vector<Vector>& values) {
  std::vector<Trajectory> controls;
  for (const auto& v : values) {
    Trajectory c(grid, static_cast<int>(v.size()));
    c.values().rowwise() = v.transpose();
    controls.push_back(std::move(c));
  }
  return open_loop_profile(std::move(controls));
}

StrategyProfile axpy(const StrategyProfile& a, double scale, const StrategyProfile& b) {
  if (a.size() != b.size()) throw StructuralError("strategy profile: member count mismatch");
  StrategyProfile out;
  for (int i = 0; i < a.size(); ++i) {
    Trajectory c = a.control(i);
    if (c.size() != b.control(i).size() || c.dim() != b.control(i).dim()) {
      throw StructuralError("strategy profile: member " + std::to_string(i) + " shape mismatch");
    }
    c.values() += scale * b.control(i).values();
    out.members.push_back({Vector(), std::move(c)});
  }
  return out;
}

}  // namespace teamopt
