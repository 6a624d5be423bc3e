#include "teamopt/infostruct.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "teamopt/errors.hpp"

namespace teamopt {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Node-major flattening of a path: entry k * dim + c.
Vector flatten(const Trajectory& g) {
  const RowMajor rows = g.values();
  return Eigen::Map<const Vector>(rows.data(), rows.size());
}

Vector row_weights(const Vector& weights, int control_dim) {
  Vector out(weights.size() * control_dim);
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    out.segment(k * control_dim, control_dim).setConstant(weights[k]);
  }
  return out;
}

}  // namespace

std::string to_string(InfoKind kind) {
  switch (kind) {
    case InfoKind::OpenLoop: return "open-loop";
    case InfoKind::ClosedLoopMarkov: return "markov";
    case InfoKind::ClosedLoopFeedback: return "feedback";
    case InfoKind::FiniteBasis: return "basis";
  }
  return "unknown";
}

InfoSpec InfoSpec::open_loop() { return {}; }

InfoSpec InfoSpec::markov() {
  InfoSpec spec;
  spec.kind = InfoKind::ClosedLoopMarkov;
  return spec;
}

InfoSpec InfoSpec::feedback(std::vector<FeatureFn> features, bool per_component) {
  return {InfoKind::ClosedLoopFeedback, std::move(features), per_component};
}

InfoSpec InfoSpec::finite_basis(std::vector<FeatureFn> features, bool per_component) {
  return {InfoKind::FiniteBasis, std::move(features), per_component};
}

InfoSpec InfoSpec::polynomial(int degree) {
  if (degree < 0) throw StructuralError("polynomial basis: degree must be >= 0");
  std::vector<FeatureFn> features;
  for (int j = 0; j <= degree; ++j) {
    features.push_back([j](const PathPrefix& y) {
      return Vector::Constant(1, std::pow(y.time(), j));
    });
  }
  return finite_basis(std::move(features));
}

InfoSubspace InfoSubspace::identity(std::vector<double> times, Vector weights, int control_dim) {
  if (static_cast<Eigen::Index>(times.size()) != weights.size()) {
    throw StructuralError("subspace: weights do not match the nodes");
  }
  InfoSubspace s;
  s.times_ = std::move(times);
  s.weights_ = std::move(weights);
  s.control_dim_ = control_dim;
  s.identity_ = true;
  s.effective_rank_ = 0;
  return s;
}

InfoSubspace::InfoSubspace(std::vector<double> times, Vector weights, int control_dim,
                           Matrix basis)
    : times_(std::move(times)),
      weights_(std::move(weights)),
      control_dim_(control_dim),
      basis_(std::move(basis)) {
  const auto rows = static_cast<Eigen::Index>(times_.size()) * control_dim_;
  if (weights_.size() != static_cast<Eigen::Index>(times_.size())) {
    throw StructuralError("subspace: weights do not match the nodes");
  }
  if (basis_.cols() == 0) throw StructuralError("subspace: zero-length basis");
  if (basis_.rows() != rows) throw StructuralError("subspace: basis rows do not match the grid");
  if (!basis_.allFinite()) throw StructuralError("subspace: basis has non-finite entries");

  gram_ = basis_.transpose() * row_weights(weights_, control_dim_).asDiagonal() * basis_;
  gram_ = 0.5 * (gram_ + gram_.transpose());
  const double m = static_cast<double>(basis_.cols());
  const double trace = gram_.trace();
  regularization_ = trace > 0.0 ? 1e-10 * trace / m : 1.0;

  // Least squares through the SVD of W^(1/2) Phi rather than the normal
  // equations, which square the conditioning of the basis.
  const Vector sqrt_w = row_weights(weights_, control_dim_).cwiseSqrt();
  const Eigen::JacobiSVD<Matrix> svd(sqrt_w.asDiagonal() * basis_,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double top = sigma.size() > 0 ? sigma(0) : 0.0;
  effective_rank_ = 0;
  while (effective_rank_ < sigma.size() && top > 0.0 && sigma(effective_rank_) > 1e-8 * top) {
    ++effective_rank_;
  }
  const Eigen::Index r = effective_rank_;
  const Matrix v = svd.matrixV().leftCols(r);
  const Vector inv = sigma.head(r).cwiseInverse();
  pinv_ = v * inv.asDiagonal() * svd.matrixU().leftCols(r).transpose() * sqrt_w.asDiagonal();
  gram_pinv_ = v * inv.cwiseAbs2().asDiagonal() * v.transpose();
}

void InfoSubspace::check_grid(const Trajectory& g) const {
  if (g.size() != nodes() || g.dim() != control_dim_) {
    throw StructuralError("subspace: path is not on the subspace grid (" +
                          std::to_string(g.size()) + "x" + std::to_string(g.dim()) +
                          " vs " + std::to_string(nodes()) + "x" +
                          std::to_string(control_dim_) + ")");
  }
  for (int k = 0; k < g.size(); ++k) {
    if (g.time(k) != times_[static_cast<std::size_t>(k)]) {
      throw StructuralError("subspace: path is not on the subspace grid (time mismatch)");
    }
  }
}

Vector InfoSubspace::moments(const Trajectory& g) const {
  check_grid(g);
  const Vector weighted = row_weights(weights_, control_dim_).cwiseProduct(flatten(g));
  if (identity_) return weighted;
  return basis_.transpose() * weighted;
}

Vector InfoSubspace::solve_gram(const Vector& rhs) const {
  if (identity_) throw StructuralError("subspace: identity subspace has no Gram system");
  if (rhs.size() != basis_.cols()) throw StructuralError("subspace: right-hand side has wrong length");
  return gram_pinv_ * rhs;
}

Vector InfoSubspace::coefficients(const Trajectory& g) const {
  check_grid(g);
  if (identity_) return flatten(g);
  return pinv_ * flatten(g);
}

Trajectory InfoSubspace::realize(const Vector& theta) const {
  const Vector flat = identity_ ? theta : Vector(basis_ * theta);
  if (flat.size() != static_cast<Eigen::Index>(times_.size()) * control_dim_) {
    throw StructuralError("subspace: coefficient vector has wrong length");
  }
  Matrix values = Eigen::Map<const RowMajor>(flat.data(), nodes(), control_dim_);
  return {times_, std::move(values)};
}

Trajectory InfoSubspace::project(const Trajectory& g) const {
  check_grid(g);
  if (identity_) return g;
  return realize(coefficients(g));
}

Vector InfoSubspace::project_feasible(const Vector& theta, const Box& box) const {
  if (box.dim() != control_dim_) throw StructuralError("subspace: box dimension mismatch");
  if (identity_) {
    Trajectory u = realize(theta);
    for (int k = 0; k < u.size(); ++k) u.set(k, box.clip(u[k]));
    return flatten(u);
  }
  if (box.free()) return theta;

  struct Slab {
    Eigen::Index row;
    double lo, hi;
    Vector direction;  // G^{-1} a
    double curvature;  // a^T G^{-1} a
  };
  std::vector<Slab> slabs;
  for (int k = 0; k < nodes(); ++k) {
    for (int c = 0; c < control_dim_; ++c) {
      if (!std::isfinite(box.lower[c]) && !std::isfinite(box.upper[c])) continue;
      const Eigen::Index row = static_cast<Eigen::Index>(k) * control_dim_ + c;
      const Vector a = basis_.row(row).transpose();
      Vector q = gram_pinv_ * a;
      const double curvature = a.dot(q);
      if (!(curvature > 0.0)) continue;
      slabs.push_back({row, box.lower[c], box.upper[c], std::move(q), curvature});
    }
  }

  Vector x = theta;
  std::vector<Vector> increments(slabs.size(), Vector::Zero(theta.size()));
  const double scale = 1.0 + box.lower.cwiseAbs().cwiseMin(box.upper.cwiseAbs()).maxCoeff();
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double worst = 0.0;
    const Vector start = x;
    for (std::size_t j = 0; j < slabs.size(); ++j) {
      const Slab& s = slabs[j];
      const Vector y = x + increments[j];
      const double v = basis_.row(s.row).dot(y);
      Vector next = y;
      if (v < s.lo) next += s.direction * ((s.lo - v) / s.curvature);
      if (v > s.hi) next -= s.direction * ((v - s.hi) / s.curvature);
      increments[j] = y - next;
      x = std::move(next);
    }
    for (const Slab& s : slabs) {
      const double v = basis_.row(s.row).dot(x);
      worst = std::max({worst, s.lo - v, v - s.hi});
    }
    // feasibility alone can be reached long before the iterate settles
    const double moved = realize(x - start).values().cwiseAbs().maxCoeff();
    if (worst <= 1e-13 * scale && moved <= 1e-14 * scale) break;
  }
  return x;
}

InfoSubspace build_subspace(const InfoSpec& spec, const Trajectory& y, const Vector& weights,
                            int control_dim) {
  if (control_dim < 1) throw StructuralError("subspace: control dimension must be >= 1");
  const auto ytimes = y.times();
  std::vector<double> times(ytimes.begin(), ytimes.end());
  if (spec.kind == InfoKind::OpenLoop) {
    return InfoSubspace::identity(std::move(times), weights, control_dim);
  }

  std::vector<FeatureFn> features = spec.features;
  bool per_component = spec.per_component;
  if (spec.kind == InfoKind::ClosedLoopMarkov) {
    features.clear();
    per_component = true;
    features.push_back([](const PathPrefix&) { return Vector::Ones(1); });
    for (int j = 0; j < y.dim(); ++j) {
      features.push_back([j](const PathPrefix& p) { return Vector::Constant(1, p.current()[j]); });
    }
  }
  if (features.empty()) throw StructuralError("subspace: zero-length basis");

  const int nodes = y.size();
  const int per_feature = per_component ? control_dim : 1;
  const auto m = static_cast<Eigen::Index>(features.size()) * per_feature;
  Matrix basis = Matrix::Zero(static_cast<Eigen::Index>(nodes) * control_dim, m);
  for (int k = 0; k < nodes; ++k) {
    const PathPrefix prefix(y, k);
    for (std::size_t j = 0; j < features.size(); ++j) {
      const Vector v = features[j](prefix);
      const auto col0 = static_cast<Eigen::Index>(j) * per_feature;
      if (per_component) {
        if (v.size() != 1) throw StructuralError("subspace: per-component feature must be scalar");
        for (int c = 0; c < control_dim; ++c) basis(k * control_dim + c, col0 + c) = v[0];
      } else {
        if (v.size() != control_dim) {
          throw StructuralError("subspace: feature dimension: expected " +
                                std::to_string(control_dim) + ", got " + std::to_string(v.size()));
        }
        basis.block(k * control_dim, col0, control_dim, 1) = v;
      }
    }
  }
  return {std::move(times), weights, control_dim, std::move(basis)};
}

InfoSubspace build_subspace(const InfoSpec& spec, const Trajectory& y, const TimeGrid& grid,
                            int control_dim) {
  if (y.size() != grid.size()) throw StructuralError("subspace: observations not on the grid");
  return build_subspace(spec, y, grid.trapezoid_weights(), control_dim);
}

Trajectory project(const InfoSubspace& subspace, const Trajectory& g) { return subspace.project(g); }

}  // namespace teamopt
