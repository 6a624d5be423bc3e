#include "teamopt/box.hpp"

#include <cmath>

namespace teamopt {

Box Box::unbounded(int dim) {
  return {Vector::Constant(dim, -kInfinity), Vector::Constant(dim, kInfinity)};
}

Box Box::uniform(int dim, double lo, double hi) {
  return {Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
}

bool Box::nonempty() const {
  if (lower.size() != upper.size()) return false;
  for (int c = 0; c < dim(); ++c) {
    if (std::isnan(lower[c]) || std::isnan(upper[c]) || lower[c] > upper[c]) return false;
  }
  return true;
}

bool Box::bounded() const { return lower.allFinite() && upper.allFinite(); }

bool Box::free() const {
  for (int c = 0; c < dim(); ++c) {
    if (std::isfinite(lower[c]) || std::isfinite(upper[c])) return false;
  }
  return true;
}

bool Box::contains(const Vector& v, double slack) const {
  for (int c = 0; c < dim(); ++c) {
    if (v[c] < lower[c] - slack || v[c] > upper[c] + slack) return false;
  }
  return true;
}

Vector Box::clip(const Vector& v) const { return v.cwiseMax(lower).cwiseMin(upper); }

}  // namespace teamopt
