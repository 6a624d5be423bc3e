#pragma once

#include <functional>
#include <string>
#include <vector>

#include "teamopt/box.hpp"
#include "teamopt/grid.hpp"
#include "teamopt/types.hpp"

namespace teamopt {

enum class InfoKind {
  OpenLoop,            // unrestricted grid control
  ClosedLoopMarkov,    // span{1, y_1(t), ..., y_k(t)} per control component
  ClosedLoopFeedback,  // user features of the observation prefix
  FiniteBasis,         // user features of time only
};

std::string to_string(InfoKind kind);

/// A basis function of a member's strategy space, evaluated on the
/// observation prefix up to the current node. Returns a vector of the
/// member's control dimension, or a 1-vector when the spec is
/// `per_component` (then it is replicated along every control axis).
using FeatureFn = std::function<Vector(const PathPrefix& y)>;

/// Declares the strategy class of one decision maker.
struct InfoSpec {
  InfoKind kind = InfoKind::OpenLoop;
  std::vector<FeatureFn> features;
  bool per_component = true;

  static InfoSpec open_loop();
  static InfoSpec markov();
  static InfoSpec feedback(std::vector<FeatureFn> features, bool per_component = true);
  static InfoSpec finite_basis(std::vector<FeatureFn> features, bool per_component = true);
  /// Monomials 1, t, ..., t^degree.
  static InfoSpec polynomial(int degree);

  /// Whether the basis must be rebuilt when the observation path changes.
  bool depends_on_observations() const {
    return kind == InfoKind::ClosedLoopMarkov || kind == InfoKind::ClosedLoopFeedback;
  }
};

/// Grid-evaluated strategy subspace of one member, together with the
/// least-squares solver of its basis in the weighted L2 product.
///
/// Basis rows are laid out node-major: row `k * control_dim + c` holds
/// component c of every basis function at node k.
class InfoSubspace {
 public:
  /// Full space on the grid; projection is the identity.
  static InfoSubspace identity(std::vector<double> times, Vector weights, int control_dim);
  InfoSubspace(std::vector<double> times, Vector weights, int control_dim, Matrix basis);

  bool is_identity() const { return identity_; }
  int control_dim() const { return control_dim_; }
  int nodes() const { return static_cast<int>(times_.size()); }
  int basis_size() const { return static_cast<int>(basis_.cols()); }
  const std::vector<double>& times() const { return times_; }
  const Vector& weights() const { return weights_; }
  const Matrix& basis() const { return basis_; }
  const Matrix& gram() const { return gram_; }
  /// Small diagonal shift for Galerkin systems assembled from this basis.
  double regularization() const { return regularization_; }
  int effective_rank() const { return effective_rank_; }
  bool rank_deficient() const { return effective_rank_ < basis_size(); }

  /// sum_k w_k Phi_k^T g_k.
  Vector moments(const Trajectory& g) const;
  /// Minimum-norm solution of the Gram system on its numerical range.
  Vector solve_gram(const Vector& rhs) const;
  /// Minimum-norm coefficients of the orthogonal projection of g.
  Vector coefficients(const Trajectory& g) const;
  /// Control path Phi theta.
  Trajectory realize(const Vector& theta) const;
  Trajectory project(const Trajectory& g) const;

  /// Projects theta, in the Gram metric, onto {theta : Phi theta in box at
  /// every node} by Dykstra's alternating projections over node slabs.
  Vector project_feasible(const Vector& theta, const Box& box) const;

 private:
  InfoSubspace() = default;
  void check_grid(const Trajectory& g) const;

  std::vector<double> times_;
  Vector weights_;
  int control_dim_ = 0;
  bool identity_ = false;
  Matrix basis_;
  Matrix gram_;
  Matrix pinv_;       // coefficients = pinv_ * flattened path
  Matrix gram_pinv_;  // pseudo-inverse of gram_ on the retained rank
  double regularization_ = 0.0;
  int effective_rank_ = 0;
};

/// Evaluates the spec on the observation path `y` and sets up the projection
/// with the given quadrature weights.
InfoSubspace build_subspace(const InfoSpec& spec, const Trajectory& y, const Vector& weights,
                            int control_dim);
/// Trapezoid-weighted variant for continuous-time grids.
InfoSubspace build_subspace(const InfoSpec& spec, const Trajectory& y, const TimeGrid& grid,
                            int control_dim);

Trajectory project(const InfoSubspace& subspace, const Trajectory& g);

}  // namespace teamopt
