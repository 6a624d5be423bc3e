#include "experiment/instance.hpp"

#include <algorithm>
#include <cmath>

#include "experiment/fields.hpp"
#include "teamopt/errors.hpp"

namespace teamopt::experiment {

namespace {

const std::string kProblem = "problem";

struct Dims {
  int n = 0;
  std::vector<int> controls;
  int d = 0;
};

Dims read_dims(const Json& p, Vector& x0) {
  Dims dims;
  x0 = fields::vector(fields::require(p, kProblem, "x0"), "problem.x0");
  dims.n = static_cast<int>(x0.size());
  if (dims.n < 1) throw ConfigError("problem.x0", "state dimension must be >= 1");
  if (const Json* sd = fields::find(p, "state_dim")) {
    if (fields::integer(*sd, "problem.state_dim") != dims.n) {
      throw ConfigError("problem.x0", "length differs from problem.state_dim");
    }
  }
  const Json& cd = fields::require(p, kProblem, "control_dims");
  if (!cd.is_array() || cd.empty()) {
    throw ConfigError("problem.control_dims", "expected a non-empty array of integers");
  }
  for (std::size_t i = 0; i < cd.size(); ++i) {
    const long long di = fields::integer(cd[i], fields::join("problem.control_dims", i));
    if (di < 1) throw ConfigError(fields::join("problem.control_dims", i), "must be >= 1");
    dims.controls.push_back(static_cast<int>(di));
    dims.d += static_cast<int>(di);
  }
  return dims;
}

void check_shape(const Matrix& m, int rows, int cols, const std::string& path) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(path, "expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                                ", got " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

// Piecewise-linear in t, clamped at the ends.
template <typename T>
std::function<T(double)> table_fn(std::vector<double> times, std::vector<T> values) {
  return [times = std::move(times), values = std::move(values)](double t) -> T {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
    const double s = (t - times[k]) / (times[k + 1] - times[k]);
    return T((1.0 - s) * values[k] + s * values[k + 1]);
  };
}

std::vector<double> table_times(const Json& v, const std::string& path) {
  const Vector t = fields::vector(fields::require(v, path, "t"), fields::join(path, "t"));
  if (t.size() < 1) throw ConfigError(fields::join(path, "t"), "needs at least one time");
  for (Eigen::Index k = 1; k < t.size(); ++k) {
    if (!(t(k) > t(k - 1))) throw ConfigError(fields::join(path, "t"), "times must increase");
  }
  return {t.data(), t.data() + t.size()};
}

/// Constant matrix or {"t": [...], "values": [matrix, ...]}; null when absent.
MatrixFn matrix_coef(const Json& p, const std::string& key, int rows, int cols) {
  const Json* v = fields::find(p, key);
  if (v == nullptr) return nullptr;
  const std::string path = fields::join(kProblem, key);
  if (v->is_object()) {
    auto times = table_times(*v, path);
    const Json& vals = fields::require(*v, path, "values");
    if (!vals.is_array() || vals.size() != times.size()) {
      throw ConfigError(fields::join(path, "values"), "needs one matrix per time");
    }
    std::vector<Matrix> mats;
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const auto sub = fields::join(fields::join(path, "values"), k);
      mats.push_back(fields::matrix(vals[k], sub));
      check_shape(mats.back(), rows, cols, sub);
    }
    return table_fn<Matrix>(std::move(times), std::move(mats));
  }
  Matrix m = fields::matrix(*v, path);
  check_shape(m, rows, cols, path);
  return LQData::constant(std::move(m));
}

VectorFn vector_coef(const Json& p, const std::string& key, int size) {
  const Json* v = fields::find(p, key);
  if (v == nullptr) return nullptr;
  const std::string path = fields::join(kProblem, key);
  if (v->is_object()) {
    auto times = table_times(*v, path);
    const Json& vals = fields::require(*v, path, "values");
    if (!vals.is_array() || vals.size() != times.size()) {
      throw ConfigError(fields::join(path, "values"), "needs one vector per time");
    }
    std::vector<Vector> vecs;
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const auto sub = fields::join(fields::join(path, "values"), k);
      vecs.push_back(fields::vector(vals[k], sub));
      if (vecs.back().size() != size) throw ConfigError(sub, "expected length " + std::to_string(size));
    }
    return table_fn<Vector>(std::move(times), std::move(vecs));
  }
  Vector out = fields::vector(*v, path);
  if (out.size() != size) throw ConfigError(path, "expected length " + std::to_string(size));
  return LQData::constant_vector(std::move(out));
}

Matrix constant_matrix(const Json& p, const std::string& key, int rows, int cols, bool required) {
  const Json* v = fields::find(p, key);
  const std::string path = fields::join(kProblem, key);
  if (v == nullptr) {
    if (required) throw ConfigError(path, "required field is missing");
    return Matrix::Zero(rows, cols);
  }
  Matrix m = fields::matrix(*v, path);
  check_shape(m, rows, cols, path);
  return m;
}

Vector constant_vector(const Json& p, const std::string& key, int size) {
  const Json* v = fields::find(p, key);
  if (v == nullptr) return Vector::Zero(size);
  const std::string path = fields::join(kProblem, key);
  Vector out = fields::vector(*v, path);
  if (out.size() != size) throw ConfigError(path, "expected length " + std::to_string(size));
  return out;
}

double horizon(const Json& p) {
  const double T = fields::number(p, kProblem, "horizon", 1.0);
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("problem.horizon", "must be positive");
  return T;
}

std::vector<FeatureFn> feedback_features(const Json& list, const std::string& path, int obs_dim) {
  if (!list.is_array() || list.empty()) throw ConfigError(path, "expected a non-empty array");
  std::vector<FeatureFn> out;
  for (std::size_t j = 0; j < list.size(); ++j) {
    if (!list[j].is_string()) throw ConfigError(fields::join(path, j), "expected a feature name");
    const auto name = list[j].get<std::string>();
    if (name == "1") {
      out.push_back([](const PathPrefix&) { return Vector::Ones(1); });
    } else if (name == "t") {
      out.push_back([](const PathPrefix& y) { return Vector::Constant(1, y.time()); });
    } else if (name == "y" || name == "mean") {
      for (int c = 0; c < obs_dim; ++c) {
        if (name == "y") {
          out.push_back([c](const PathPrefix& y) { return Vector::Constant(1, y.current()(c)); });
        } else {
          out.push_back([c](const PathPrefix& y) {
            double sum = 0.0;
            for (int k = 0; k <= y.last(); ++k) sum += y.at(k)(c);
            return Vector::Constant(1, sum / (y.last() + 1));
          });
        }
      }
    } else {
      throw ConfigError(fields::join(path, j), "unknown feature '" + name + "' (1 | t | y | mean)");
    }
  }
  return out;
}

std::vector<DecisionMaker> read_members(const Json& root, const Dims& dims) {
  std::vector<DecisionMaker> out;
  const Json* list = fields::find(root, "members");
  if (list != nullptr && (!list->is_array() || list->size() != dims.controls.size())) {
    throw ConfigError("members", "expected one entry per control block (" +
                                     std::to_string(dims.controls.size()) + ")");
  }
  for (std::size_t i = 0; i < dims.controls.size(); ++i) {
    DecisionMaker dm;
    dm.control_dim = dims.controls[i];
    dm.name = "dm" + std::to_string(i + 1);
    dm.info = InfoSpec::open_loop();
    if (list == nullptr) {
      out.push_back(std::move(dm));
      continue;
    }
    const Json& m = (*list)[i];
    const std::string path = fields::join("members", i);
    fields::expect_object(m, path);
    dm.name = fields::string(m, path, "name", dm.name);

    int obs_dim = dims.n;
    if (const Json* obs = fields::find(m, "observe")) {
      const auto opath = fields::join(path, "observe");
      if (!obs->is_array() || obs->empty()) throw ConfigError(opath, "expected state indices");
      std::vector<int> idx;
      for (std::size_t j = 0; j < obs->size(); ++j) {
        const long long c = fields::integer((*obs)[j], fields::join(opath, j));
        if (c < 0 || c >= dims.n) {
          throw ConfigError(fields::join(opath, j), "state index out of range");
        }
        idx.push_back(static_cast<int>(c));
      }
      obs_dim = static_cast<int>(idx.size());
      dm.observation_dim = obs_dim;
      dm.observe = observe_components(std::move(idx));
    }

    if (const Json* info = fields::find(m, "info")) {
      const auto ipath = fields::join(path, "info");
      fields::expect_object(*info, ipath);
      const auto kind = fields::string(*info, ipath, "kind", "open-loop");
      if (kind == "open-loop") {
        dm.info = InfoSpec::open_loop();
      } else if (kind == "markov") {
        dm.info = InfoSpec::markov();
      } else if (kind == "polynomial" || kind == "basis") {
        const long long degree = fields::integer(
            *info, ipath, kind == "basis" ? "polynomial_degree" : "degree", 0);
        if (degree < 0) throw ConfigError(fields::join(ipath, "degree"), "must be >= 0");
        dm.info = InfoSpec::polynomial(static_cast<int>(degree));
      } else if (kind == "feedback") {
        dm.info = InfoSpec::feedback(feedback_features(
            fields::require(*info, ipath, "features"), fields::join(ipath, "features"), obs_dim));
      } else {
        throw ConfigError(fields::join(ipath, "kind"),
                          "unknown kind '" + kind + "' (open-loop | markov | polynomial | feedback)");
      }
    }

    if (const Json* box = fields::find(m, "box")) {
      const auto bpath = fields::join(path, "box");
      fields::expect_object(*box, bpath);
      auto bound = [&](const std::string& key, double missing) {
        Vector v = Vector::Constant(dm.control_dim, missing);
        const Json* b = fields::find(*box, key);
        if (b == nullptr) return v;
        const auto kpath = fields::join(bpath, key);
        if (!b->is_array() || static_cast<int>(b->size()) != dm.control_dim) {
          throw ConfigError(kpath, "expected " + std::to_string(dm.control_dim) + " entries");
        }
        for (std::size_t c = 0; c < b->size(); ++c) {
          if (!(*b)[c].is_null()) v(static_cast<Eigen::Index>(c)) = fields::number((*b)[c], fields::join(kpath, c));
        }
        return v;
      };
      dm.box = Box{bound("lower", -kInfinity), bound("upper", kInfinity)};
      if (!dm.box.nonempty()) throw ConfigError(bpath, "lower bound exceeds upper bound");
    }
    out.push_back(std::move(dm));
  }
  return out;
}

TimeGrid make_grid(const ExperimentConfig& cfg, double T) {
  return cfg.grid_steps > 0 ? TimeGrid(T, cfg.grid_steps) : TimeGrid::with_default_resolution(T);
}

GnfData read_gnf(const Json& p, const Dims& dims, const Vector& x0) {
  const int n = dims.n, d = dims.d;
  GnfData g;
  g.state_dim = n;
  g.control_dims = dims.controls;
  g.horizon = horizon(p);
  g.x0 = x0;
  const Matrix A = constant_matrix(p, "A", n, n, false);
  const Vector w = constant_vector(p, "sin_weight", n);
  const Matrix B = constant_matrix(p, "B", n, d, true);
  const Matrix R = constant_matrix(p, "R", d, d, true);
  const Matrix H = constant_matrix(p, "H", n, n, false);
  const Vector m = constant_vector(p, "m", d);
  const Matrix M = constant_matrix(p, "M", n, n, false);
  const Vector N = constant_vector(p, "N", n);
  g.drift = [A, w](double, const Vector& x) -> Vector {
    return A * x + w.cwiseProduct(x.array().sin().matrix());
  };
  g.input = [B](double, const Vector&) -> Matrix { return B; };
  g.weight = [R](double, const Vector&) -> Matrix { return R; };
  g.state_cost = [H](double, const Vector& x) { return x.dot(H * x); };
  g.linear = [m](double, const Vector&) -> Vector { return m; };
  g.terminal_cost = [M, N](const Vector& x) { return 0.5 * x.dot(M * x) + N.dot(x); };
  g.terminal_cost_grad = [M, N](const Vector& x) -> Vector { return M * x + N; };
  g.dynamics_jac_x = [A, w](double, const Vector& x, const Vector&) -> Matrix {
    return A + Matrix(w.cwiseProduct(x.array().cos().matrix()).asDiagonal());
  };
  g.running_cost_grad_x = [H](double, const Vector& x, const Vector&) -> Vector {
    return 0.5 * (H + H.transpose()) * x;
  };
  return g;
}

}  // namespace

Instance build_instance(const ExperimentConfig& cfg) {
  const Json& root = cfg.resolved;
  const Json& p = root.at("problem");
  Instance inst;
  Vector x0;
  const Dims dims = read_dims(p, x0);
  const int n = dims.n, d = dims.d;
  inst.members = read_members(root, dims);

  try {
    if (cfg.problem_kind == "lq") {
      LQData lq;
      lq.state_dim = n;
      lq.control_dims = dims.controls;
      lq.horizon = horizon(p);
      lq.x0 = x0;
      lq.A = matrix_coef(p, "A", n, n);
      lq.B = matrix_coef(p, "B", n, d);
      if (!lq.B) throw ConfigError("problem.B", "required field is missing");
      lq.H = matrix_coef(p, "H", n, n);
      lq.R = matrix_coef(p, "R", d, d);
      if (!lq.R) throw ConfigError("problem.R", "required field is missing");
      lq.E = matrix_coef(p, "E", d, n);
      lq.b = vector_coef(p, "b", n);
      lq.F = vector_coef(p, "F", n);
      lq.m = vector_coef(p, "m", d);
      lq.terminal_weight = constant_matrix(p, "M", n, n, false);
      lq.terminal_linear = constant_vector(p, "N", n);
      inst.grid = make_grid(cfg, lq.horizon);
      check_lq(lq, *inst.grid);
      inst.continuous = to_team_problem(lq, *inst.grid, inst.members);
      inst.lq = std::move(lq);
    } else if (cfg.problem_kind == "gnf") {
      GnfData g = read_gnf(p, dims, x0);
      inst.grid = make_grid(cfg, g.horizon);
      inst.continuous = to_team_problem(g, inst.members);
      inst.gnf = std::move(g);
    } else {
      inst.discrete = true;
      DiscreteLQData lq;
      lq.state_dim = n;
      lq.control_dims = dims.controls;
      const long long steps = fields::integer(fields::require(p, kProblem, "steps"), "problem.steps");
      if (steps < 1) throw ConfigError("problem.steps", "must be an integer >= 1");
      lq.steps = static_cast<int>(steps);
      lq.x0 = x0;
      lq.A = constant_matrix(p, "A", n, n, true);
      lq.B = constant_matrix(p, "B", n, d, true);
      lq.H = constant_matrix(p, "H", n, n, false);
      lq.R = constant_matrix(p, "R", d, d, true);
      lq.E = constant_matrix(p, "E", d, n, false);
      lq.M = constant_matrix(p, "M", n, n, false);
      lq.b = constant_vector(p, "b", n);
      lq.F = constant_vector(p, "F", n);
      lq.m = constant_vector(p, "m", d);
      lq.N = constant_vector(p, "N", n);
      inst.discrete_problem = to_discrete_problem(lq, inst.members);
    }
  } catch (const StructuralError& e) {
    throw ConfigError("problem", e.what());
  }
  return inst;
}

}  // namespace teamopt::experiment
