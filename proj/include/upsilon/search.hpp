#pragma once

// Estimating Υ(X, D, r) = min c2 / ‖F‖² over stable balanced configurations.
//
// With the flags fixed, the joint multiplicities are constant and both c2 and
// ‖F‖² are quadratic forms in the weights. The inner problem is therefore a
// Rayleigh quotient on the balance subspace, restricted to the open polyhedral
// cone cut out by strict weight ordering and by the parabolic-degree
// inequalities. The outer loop enumerates flag configurations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "upsilon/chern.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/filtration.hpp"
#include "upsilon/parallel.hpp"
#include "upsilon/random.hpp"
#include "upsilon/rational.hpp"
#include "upsilon/stability.hpp"
#include "upsilon/subspace.hpp"
#include "upsilon/surface.hpp"

namespace upsilon {

/// Weights w_{i,s} per component i and flag step s, with the step multiplicities.
template <class Scalar>
struct BasicWeightVector {
  std::vector<std::vector<Scalar>> weights;
  std::vector<std::vector<std::size_t>> multiplicities;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    return n;
  }

  std::vector<Scalar> flatten() const {
    std::vector<Scalar> out;
    for (const auto& w : weights) out.insert(out.end(), w.begin(), w.end());
    return out;
  }

  friend bool operator==(const BasicWeightVector&, const BasicWeightVector&) = default;
};

using WeightVector = BasicWeightVector<double>;
using ExactWeights = BasicWeightVector<Rat>;

struct CoordinateLayout {
  std::vector<std::size_t> offset;
  std::vector<std::vector<std::size_t>> multiplicities;
  std::size_t size = 0;

  static CoordinateLayout of(const FilteredConfiguration& fc) {
    CoordinateLayout l;
    for (const auto& f : fc) {
      l.offset.push_back(l.size);
      std::vector<std::size_t> m;
      for (std::size_t s = 0; s < f.step_count(); ++s) m.push_back(f.multiplicity(s));
      l.size += m.size();
      l.multiplicities.push_back(std::move(m));
    }
    return l;
  }

  std::size_t index(std::size_t component, std::size_t step) const { return offset.at(component) + step; }

  /// Number of weight coordinates left after imposing balance.
  std::size_t free_dimension() const { return size - multiplicities.size(); }

  template <class Scalar>
  BasicWeightVector<Scalar> unflatten(const std::vector<Scalar>& flat) const {
    if (flat.size() != size) throw DimensionMismatch("weight vector has the wrong length");
    BasicWeightVector<Scalar> w;
    w.multiplicities = multiplicities;
    for (std::size_t i = 0; i < offset.size(); ++i)
      w.weights.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(offset[i]),
                             flat.begin() + static_cast<std::ptrdiff_t>(offset[i] + multiplicities[i].size()));
    return w;
  }
};

/// c2 = wᵀ A w and ‖F‖² = wᵀ diag(B) w for every weight vector on fixed flags.
/// Strict constraints: row · w < 0 for every ordering and stability row.
struct QuadraticPair {
  CoordinateLayout layout;
  RatMatrix a;
  std::vector<Rat> b_diagonal;
  RatMatrix balance_constraints;
  RatMatrix ordering_constraints;
  RatMatrix stability_constraints;
  std::vector<Subspace> stability_subspaces;
  std::vector<Rat> start;
};

struct AssembleOptions {
  bool stability_rows = true;
  std::size_t row_samples = 32;  // random subspaces per dimension, rank ≥ 3 only
  std::uint64_t seed = 0;
  long sample_height = 7;
  std::size_t closure_depth = 2;
  std::size_t candidate_cap = 256;
};

inline Rat quadratic_value(const RatMatrix& a, const std::vector<Rat>& w) {
  Rat s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (w[i].is_zero()) continue;
    Rat row;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (!a[i][j].is_zero() && !w[j].is_zero()) row += a[i][j] * w[j];
    s += w[i] * row;
  }
  return s;
}

inline Rat diagonal_value(const std::vector<Rat>& b, const std::vector<Rat>& w) {
  Rat s;
  for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * w[i] * w[i];
  return s;
}

/// Append the parabolic-degree row of `v` unless it is already present.
inline bool add_stability_row(QuadraticPair& qp, const Subspace& v, const FilteredConfiguration& shape,
                              const DivisorConfiguration& config) {
  if (std::find(qp.stability_subspaces.begin(), qp.stability_subspaces.end(), v) != qp.stability_subspaces.end())
    return false;
  RatVector row;
  for (auto& part : degree_coefficients(v, shape, config)) row.insert(row.end(), part.begin(), part.end());
  qp.stability_constraints.push_back(std::move(row));
  qp.stability_subspaces.push_back(v);
  return true;
}

inline QuadraticPair assemble_quadratics(const FilteredConfiguration& shape, const DivisorConfiguration& config,
                                         const AssembleOptions& opts = {}) {
  require_valid(config);
  require_shape(shape, config);
  QuadraticPair qp;
  qp.layout = CoordinateLayout::of(shape);
  const std::size_t n = qp.layout.size;
  qp.a.assign(n, RatVector(n));
  qp.b_diagonal.assign(n, Rat());

  for (std::size_t i = 0; i < shape.size(); ++i) {
    const Filtration& f = shape[i];
    for (std::size_t s = 0; s < f.step_count(); ++s) {
      const std::size_t u = qp.layout.index(i, s);
      qp.a[u][u] = -Rat(f.multiplicity(s)) * Rat(config(i, i)) / 2;
      qp.b_diagonal[u] = Rat(f.multiplicity(s)) * config.degree(i);
    }
    for (std::size_t j = i + 1; j < shape.size(); ++j) {
      if (config(i, j) == 0) continue;
      auto m = joint_multiplicities(f, shape[j]);
      for (std::size_t s = 0; s < f.step_count(); ++s)
        for (std::size_t t = 0; t < shape[j].step_count(); ++t) {
          if (m[s][t] == 0) continue;
          Rat entry = -Rat(m[s][t]) * Rat(config(i, j)) / 2;
          qp.a[qp.layout.index(i, s)][qp.layout.index(j, t)] = entry;
          qp.a[qp.layout.index(j, t)][qp.layout.index(i, s)] = entry;
        }
    }
    RatVector balance(n);
    for (std::size_t s = 0; s < f.step_count(); ++s) balance[qp.layout.index(i, s)] = Rat(f.multiplicity(s));
    qp.balance_constraints.push_back(std::move(balance));
    for (std::size_t s = 0; s + 1 < f.step_count(); ++s) {
      RatVector order(n);
      order[qp.layout.index(i, s + 1)] = 1;
      order[qp.layout.index(i, s)] = -1;
      qp.ordering_constraints.push_back(std::move(order));
    }
    for (const auto& w : f.weights()) qp.start.push_back(w);
  }

  if (opts.stability_rows && shape.rank() >= 2) {
    std::vector<Subspace> rows;
    if (shape.rank() == 2) {
      for (const auto& f : shape)
        for (const auto& step : f.steps())
          if (step.space.is_proper() && std::find(rows.begin(), rows.end(), step.space) == rows.end())
            rows.push_back(step.space);
      rows.push_back(generic_line(rows));
    } else {
      rows = candidate_subspaces(shape, opts.closure_depth, opts.candidate_cap).subspaces;
      for (std::size_t d = 1; d < shape.rank(); ++d)
        for (std::size_t k = 0; k < opts.row_samples; ++k) {
          Rng rng = make_rng(opts.seed, {0x70e5, d, k});
          rows.push_back(random_subspace(shape.rank(), d, opts.sample_height, rng));
        }
    }
    for (const auto& v : rows) add_stability_row(qp, v, shape, config);
  }
  return qp;
}

struct InnerOptions {
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  double interior_pull = 0.02;
};

struct InnerResult {
  bool feasible = false;
  /// The unconstrained eigen-minimizer violates ordering or stability; the
  /// minimum over the closed cone then sits on its boundary.
  bool boundary_flag = false;
  bool converged = true;
  WeightVector weights;  // strictly feasible, max |w| = 1
  double ratio = std::numeric_limits<double>::quiet_NaN();
  /// Minimum generalized eigenvalue of (A, B) on the balance subspace.
  double eigen_ratio = std::numeric_limits<double>::quiet_NaN();
  /// Best value on the closed cone (equals `ratio` when interior).
  double infimum = std::numeric_limits<double>::quiet_NaN();
  WeightVector boundary_weights;
  WeightVector interior_weights;
  std::size_t iterations = 0;
};

namespace detail {

struct ReducedProblem {
  Eigen::MatrixXd to_weights;  // w = to_weights · y
  Eigen::MatrixXd from_weights;
  Eigen::MatrixXd m;           // yᵀ m y = c2, yᵀ y = ‖F‖²
  Eigen::MatrixXd g;           // unit-norm strict constraint rows in y
  bool degenerate_row = false;  // a strict constraint vanishes on the balance subspace
};

inline Eigen::MatrixXd to_eigen(const RatMatrix& m, std::size_t cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j].to_double();
  return out;
}

// Orthonormal basis of {x : rows · x = 0}.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& rows, Eigen::Index dim) {
  if (rows.rows() == 0) return Eigen::MatrixXd::Identity(dim, dim);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cutoff) ++rank;
  return svd.matrixV().rightCols(dim - rank);
}

inline ReducedProblem reduce_problem(const QuadraticPair& qp) {
  const auto n = static_cast<Eigen::Index>(qp.layout.size);
  Eigen::MatrixXd a = to_eigen(qp.a, qp.layout.size);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) b(k) = qp.b_diagonal[static_cast<std::size_t>(k)].to_double();
  Eigen::MatrixXd c = to_eigen(qp.balance_constraints, qp.layout.size);
  Eigen::MatrixXd basis = null_space(c, n);
  const Eigen::Index k = basis.cols();
  if (k == 0) throw InvalidArgument("the flag shape leaves no free weights after balancing");

  Eigen::MatrixXd b_red = basis.transpose() * b.asDiagonal() * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> b_eig(b_red, Eigen::EigenvaluesOnly);
  double b_max = b_eig.eigenvalues().maxCoeff();
  if (!(b_eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, b_max)))
    throw NumericalError("norm form is singular on the balance subspace");
  Eigen::LLT<Eigen::MatrixXd> llt(b_red);
  if (llt.info() != Eigen::Success) throw NumericalError("norm form is singular on the balance subspace");

  ReducedProblem p;
  Eigen::MatrixXd u_inv = llt.matrixU().solve(Eigen::MatrixXd::Identity(k, k));
  p.to_weights = basis * u_inv;
  p.from_weights = Eigen::MatrixXd(llt.matrixU()) * basis.transpose();
  p.m = p.to_weights.transpose() * a * p.to_weights;
  p.m = 0.5 * (p.m + p.m.transpose());

  RatMatrix strict = qp.ordering_constraints;
  strict.insert(strict.end(), qp.stability_constraints.begin(), qp.stability_constraints.end());
  Eigen::MatrixXd g = to_eigen(strict, qp.layout.size) * p.to_weights;
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    double norm = g.row(r).norm();
    if (norm < 1e-12) {
      p.degenerate_row = true;
      continue;
    }
    g.row(r) /= norm;
  }
  p.g = std::move(g);
  return p;
}

inline double max_violation(const Eigen::MatrixXd& g, const Eigen::VectorXd& y) {
  if (g.rows() == 0) return -std::numeric_limits<double>::infinity();
  return (g * y).maxCoeff();
}

// Relaxation method for g y ≤ -1; returns a strictly interior point.
inline std::optional<Eigen::VectorXd> find_interior(const Eigen::MatrixXd& g, Eigen::VectorXd y) {
  if (g.rows() == 0) return y;
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd s = g * y;
    Eigen::Index worst = 0;
    double v = s.maxCoeff(&worst) + 1.0;
    if (v <= 0) return y;
    y -= v * g.row(worst).transpose();
  }
  return std::nullopt;
}

struct FaceSearch {
  Eigen::VectorXd y;
  double value;
  bool on_boundary;
  bool converged;
  std::size_t iterations;
};

// Active-set descent of yᵀMy on the unit sphere within the closed cone g y ≤ 0,
// starting from a strictly interior unit vector.
inline FaceSearch face_search(const Eigen::MatrixXd& m, const Eigen::MatrixXd& g, Eigen::VectorXd y,
                              double tolerance, std::size_t max_iter) {
  const Eigen::Index k = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> active;
  auto active_rows = [&]() {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(active.size()), k);
    for (std::size_t q = 0; q < active.size(); ++q) rows.row(static_cast<Eigen::Index>(q)) = g.row(active[q]);
    return rows;
  };
  auto is_active = [&](Eigen::Index r) { return std::find(active.begin(), active.end(), r) != active.end(); };
  // Largest t ≤ t_max keeping g(y + t d) ≤ 0 on inactive rows; reports the blocking row.
  auto step_limit = [&](const Eigen::VectorXd& d, double t_max, Eigen::Index& block) {
    block = -1;
    Eigen::VectorXd gy = g * y, gd = g * d;
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      if (is_active(r) || gd(r) <= 1e-15) continue;
      double t = std::max(0.0, -gy(r) / gd(r));
      if (t < t_max) {
        t_max = t;
        block = r;
      }
    }
    return t_max;
  };

  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    Eigen::MatrixXd q = null_space(active_rows(), k);
    if (q.cols() == 0) break;

    // Minimizer of the quotient on the current face, oriented toward y.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.transpose() * m * q);
    if (es.info() != Eigen::Success) throw NumericalError("eigen solver failed on a face");
    const double lowest = es.eigenvalues()(0);
    Eigen::Index mult = 1;
    while (mult < es.eigenvalues().size() && es.eigenvalues()(mult) <= lowest + 1e-10 * scale) ++mult;
    Eigen::MatrixXd eigenspace = q * es.eigenvectors().leftCols(mult);
    Eigen::VectorXd u = eigenspace * (eigenspace.transpose() * y);
    if (u.norm() < 1e-12) u = eigenspace.col(0);
    u.normalize();
    if (u.dot(y) < 0) u = -u;

    const double f = y.dot(m * y);
    if ((u - y).norm() > 1e-12 && u.dot(m * u) < f - tolerance * scale * 1e-3) {
      Eigen::Index block = -1;
      double t = step_limit(u - y, 1.0, block);
      if (t > 1e-14 || block < 0) {
        y = (y + t * (u - y)).normalized();
        if (block >= 0) active.push_back(block);
        continue;
      }
      active.push_back(block);
      continue;
    }

    // At the face minimizer: KKT multipliers of ∇f + Σ μ_k g_k = 0.
    Eigen::VectorXd grad = m * y - f * y;
    if (active.empty()) return {y, f, false, true, iter};
    Eigen::MatrixXd rows = active_rows();
    Eigen::VectorXd mu = rows.transpose().colPivHouseholderQr().solve(-grad);
    Eigen::Index worst = 0;
    double min_mu = mu.minCoeff(&worst);
    if (min_mu >= -1e-9 * scale) return {y, f, true, true, iter};
    active.erase(active.begin() + worst);

    // Leave the dropped face along the projected steepest descent, with an
    // exact search in the plane spanned by y and the direction.
    Eigen::MatrixXd q2 = null_space(active_rows(), k);
    Eigen::VectorXd d = -(q2 * (q2.transpose() * grad));
    d -= d.dot(y) * y;
    if (d.norm() < 1e-14) return {y, f, true, true, iter};
    d.normalize();
    const double b = y.dot(m * d), c = d.dot(m * d);
    const double theta = 0.5 * std::atan2(-2.0 * b, f - c);
    double t_opt = std::tan(std::clamp(theta, 1e-9, 1.5707963));
    Eigen::Index block = -1;
    double t = step_limit(d, t_opt, block);
    y = (y + t * d).normalized();
    if (block >= 0) active.push_back(block);
  }
  return {y, y.dot(m * y), !active.empty(), false, iter};
}

inline WeightVector to_weight_vector(const ReducedProblem& p, const CoordinateLayout& layout,
                                     const Eigen::VectorXd& y) {
  Eigen::VectorXd w = p.to_weights * y;
  double mx = w.cwiseAbs().maxCoeff();
  if (mx > 0) w /= mx;
  return layout.unflatten(std::vector<double>(w.data(), w.data() + w.size()));
}

}  // namespace detail

/// Minimize wᵀAw / wᵀBw over balanced weights, staying strictly inside the
/// ordering and stability constraints carried by `qp`.
inline InnerResult inner_minimize(const QuadraticPair& qp, double tolerance, std::size_t max_iter,
                                  const InnerOptions& opts = {}) {
  if (!(tolerance > 0)) throw InvalidArgument("tolerance must be positive");
  if (max_iter == 0) throw InvalidArgument("max_iter must be positive");
  detail::ReducedProblem p = detail::reduce_problem(qp);
  const Eigen::Index k = p.m.rows();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.m);
  if (es.info() != Eigen::Success) throw NumericalError("generalized eigenvalue solver did not converge");

  InnerResult out;
  out.eigen_ratio = es.eigenvalues()(0);
  if (p.degenerate_row) return out;

  const Eigen::VectorXd v = es.eigenvectors().col(0);
  for (double sign : {1.0, -1.0}) {
    Eigen::VectorXd y = sign * v;
    if (detail::max_violation(p.g, y) < -1e-9) {
      out.feasible = true;
      out.ratio = out.infimum = out.eigen_ratio;
      out.weights = out.boundary_weights = out.interior_weights = detail::to_weight_vector(p, qp.layout, y);
      return out;
    }
  }
  out.boundary_flag = true;

  std::vector<Eigen::VectorXd> seeds;
  {
    Eigen::VectorXd w0(static_cast<Eigen::Index>(qp.start.size()));
    for (std::size_t i = 0; i < qp.start.size(); ++i) w0(static_cast<Eigen::Index>(i)) = qp.start[i].to_double();
    Eigen::VectorXd y0 = p.from_weights * w0;
    if (y0.norm() > 1e-12) seeds.push_back(y0);
    Rng rng = make_rng(opts.seed, {0x1a7e});
    std::normal_distribution<double> normal;
    for (std::size_t r = 0; r < opts.restarts; ++r) {
      Eigen::VectorXd y(k);
      for (Eigen::Index j = 0; j < k; ++j) y(j) = normal(rng);
      seeds.push_back(y);
    }
  }

  std::optional<detail::FaceSearch> best;
  Eigen::VectorXd best_interior;
  bool any_converged = false;
  for (auto& seed : seeds) {
    auto interior = detail::find_interior(p.g, seed);
    if (!interior) continue;
    Eigen::VectorXd start = interior->normalized();
    auto found = detail::face_search(p.m, p.g, start, tolerance, max_iter);
    out.iterations += found.iterations;
    any_converged = any_converged || found.converged;
    if (!best || found.value < best->value - 1e-12) {
      best = found;
      best_interior = start;
    }
  }
  if (!best) return out;
  if (!any_converged)
    throw NumericalError("constrained search did not converge within " + std::to_string(max_iter) + " iterations");

  out.feasible = true;
  out.infimum = best->value;
  out.boundary_weights = detail::to_weight_vector(p, qp.layout, best->y);
  out.interior_weights = detail::to_weight_vector(p, qp.layout, best_interior);
  Eigen::VectorXd pulled = (best->y + opts.interior_pull * best_interior).normalized();
  if (!best->on_boundary) pulled = best->y;
  out.weights = detail::to_weight_vector(p, qp.layout, pulled);
  out.ratio = pulled.dot(p.m * pulled);
  return out;
}

/// Convex blend of the boundary minimizer toward the interior start; strictly
/// feasible for every pull > 0 because the constraints are homogeneous.
inline WeightVector pull_inside(const InnerResult& r, double pull) {
  WeightVector out = r.boundary_weights;
  double mx = 0;
  for (std::size_t i = 0; i < out.weights.size(); ++i)
    for (std::size_t s = 0; s < out.weights[i].size(); ++s) {
      out.weights[i][s] += pull * r.interior_weights.weights[i][s];
      mx = std::max(mx, std::abs(out.weights[i][s]));
    }
  if (mx > 0)
    for (auto& w : out.weights)
      for (auto& x : w) x /= mx;
  return out;
}

/// Closest rational with denominator ≤ max_denominator (continued fractions).
inline Rat nearest_rational(double x, long max_denominator) {
  if (!std::isfinite(x)) throw NumericalError("cannot rationalize a non-finite weight");
  if (max_denominator < 1) throw InvalidArgument("max_denominator must be positive");
  const bool negative = x < 0;
  long double target = std::fabs(static_cast<long double>(x));
  long double frac = target;
  long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  Rat best;
  bool done = false;
  for (int it = 0; it < 64 && !done; ++it) {
    long double a_real = std::floor(frac);
    if (a_real > 1e15L) break;
    long a = static_cast<long>(a_real);
    long h2 = a * h1 + h0, k2 = a * k1 + k0;
    if (k2 > max_denominator) {
      long t = (max_denominator - k0) / k1;
      long hs = t * h1 + h0, ks = t * k1 + k0;
      long double e_conv = std::fabs(target - static_cast<long double>(h1) / k1);
      long double e_semi = std::fabs(target - static_cast<long double>(hs) / ks);
      best = e_semi < e_conv ? Rat(hs, ks) : Rat(h1, k1);
      done = true;
      break;
    }
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    best = Rat(h1, k1);
    long double rem = frac - a_real;
    if (rem < 1e-18L) break;
    frac = 1.0L / rem;
  }
  return negative ? -best : best;
}

/// Round every weight, then restore Σ_s w_{i,s} mult_{i,s} = 0 exactly by a
/// per-component shift. Throws OrderingCollapse when two adjacent weights of a
/// component coincide after rounding.
inline ExactWeights rationalize(const WeightVector& weights, long max_denominator) {
  ExactWeights out;
  out.multiplicities = weights.multiplicities;
  for (std::size_t i = 0; i < weights.weights.size(); ++i) {
    const auto& w = weights.weights[i];
    const auto& mult = weights.multiplicities.at(i);
    if (mult.size() != w.size())
      throw DimensionMismatch("component " + std::to_string(i) + " has mismatched weights and multiplicities");
    std::vector<Rat> exact;
    Rat sum;
    std::size_t total = 0;
    for (std::size_t s = 0; s < w.size(); ++s) {
      exact.push_back(nearest_rational(w[s], max_denominator));
      sum += exact.back() * Rat(mult[s]);
      total += mult[s];
    }
    Rat shift = sum / Rat(total);
    for (auto& x : exact) x -= shift;
    for (std::size_t s = 1; s < exact.size(); ++s)
      if (!(exact[s] < exact[s - 1])) throw OrderingCollapse(i, s);
    out.weights.push_back(std::move(exact));
  }
  return out;
}

inline FilteredConfiguration apply_weights(const FilteredConfiguration& shape, const ExactWeights& w) {
  std::vector<Filtration> out;
  for (std::size_t i = 0; i < shape.size(); ++i) out.push_back(shape[i].with_weights(w.weights.at(i)));
  return FilteredConfiguration(std::move(out));
}

enum class Strategy { Random, Coincident, Generic, UserSupplied };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Coincident: return "coincident";
    case Strategy::Generic: return "generic";
    case Strategy::UserSupplied: return "user";
  }
  return "?";
}

struct SearchOptions {
  std::size_t budget = 500;
  std::uint64_t seed = 0;
  std::vector<Strategy> strategies{Strategy::Random, Strategy::Coincident, Strategy::Generic};
  std::vector<FilteredConfiguration> user_shapes;
  long flag_height = 7;
  long max_denominator = 64;
  double tolerance = 1e-10;
  std::size_t max_iter = 500;
  StabilityMode stability_mode = Auto{};
  std::size_t search_samples = 200;  // per dimension while searching, rank ≥ 3
  std::size_t final_samples = 2000;  // per dimension when certifying the reported estimate
  std::size_t cutting_rounds = 4;
  std::size_t workers = 1;
};

struct TheoremViolationRecord {
  std::size_t candidate;
  FilteredConfiguration configuration;
  Rat c2;
};

struct SearchLog {
  std::size_t evaluated = 0;
  std::size_t no_free_weights = 0;
  std::size_t infeasible = 0;
  std::size_t unstable = 0;
  std::size_t stable = 0;
  std::size_t failed = 0;
  std::size_t interior_minima = 0;
  std::size_t collapse_retries = 0;
  std::size_t cutting_planes = 0;
  std::size_t verification_rejections = 0;
  std::size_t heuristic_negative = 0;
  double bridge_max_relative_error = 0;
  std::map<std::string, std::size_t> per_strategy;
  std::vector<std::pair<std::size_t, Rat>> improvements;  // (candidate, best ratio so far)
};

struct UpsilonEstimate {
  FilteredConfiguration best_configuration;
  Rat c2;
  Rat norm_sq;
  Rat ratio;
  double float_ratio = 0;
  StabilityVerdict verdict;
  bool attained = false;
  Strategy strategy = Strategy::Random;
  std::size_t candidate = 0;
  SearchLog log;
  std::vector<TheoremViolationRecord> violations;
};

namespace detail {

inline std::vector<std::size_t> random_dims(std::size_t r, Rng& rng) {
  std::vector<std::size_t> dims;
  if (r < 2) return dims;
  while (dims.empty())
    for (std::size_t d = 1; d < r; ++d)
      if (r == 2 || coin(rng, 0.5)) dims.push_back(d);
  return dims;
}

inline std::vector<Subspace> random_flag(std::size_t r, const std::vector<std::size_t>& dims, long height, Rng& rng) {
  RatMatrix rows;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    rows.assign(r, RatVector(r));
    for (auto& row : rows)
      for (auto& x : row) x = Rat(uniform_int(rng, -height, height));
    if (upsilon::detail::rank_of(rows, r) == r) break;
  }
  std::vector<Subspace> flag;
  for (std::size_t d : dims) flag.push_back(reduce(RatMatrix(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(d)), r));
  return flag;
}

// Rows (1, t, t², ...) at distinct nodes: any r of them are independent, so
// flags of different components are in general position.
inline std::vector<Subspace> moment_flag(std::size_t r, std::size_t component, std::size_t shift,
                                         const std::vector<std::size_t>& dims) {
  RatMatrix rows;
  for (std::size_t j = 0; j < r; ++j) {
    long t = static_cast<long>(1 + j + r * (component + shift));
    RatVector row;
    Rat p = 1;
    for (std::size_t e = 0; e < r; ++e, p *= Rat(t)) row.push_back(p);
    rows.push_back(std::move(row));
  }
  std::vector<Subspace> flag;
  for (std::size_t d : dims) flag.push_back(reduce(RatMatrix(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(d)), r));
  return flag;
}

inline Filtration placeholder_filtration(const std::vector<Subspace>& flag) {
  std::vector<Rat> w;
  for (std::size_t s = 0; s <= flag.size(); ++s) w.push_back(Rat(static_cast<long>(flag.size() - s)));
  return balance_shift(Filtration::from_flag(flag, w));
}

inline FilteredConfiguration make_shape(Strategy strategy, std::size_t candidate, const DivisorConfiguration& config,
                                        std::size_t r, const SearchOptions& opts) {
  Rng rng = make_rng(opts.seed, {0x5ea7c4, candidate});
  std::vector<std::size_t> positive;
  for (std::size_t i = 0; i < config.size(); ++i)
    if (config.degree(i).sign() > 0) positive.push_back(i);

  if (strategy == Strategy::UserSupplied) {
    if (opts.user_shapes.empty()) throw InvalidArgument("user-supplied strategy requested without shapes");
    const auto& shape = opts.user_shapes[(candidate / opts.strategies.size()) % opts.user_shapes.size()];
    return shape;
  }

  std::vector<bool> nontrivial(config.size(), false);
  bool all = strategy == Strategy::Coincident || coin(rng, 0.25);
  bool any = false;
  for (std::size_t i : positive) {
    nontrivial[i] = all || coin(rng, 0.75);
    any = any || nontrivial[i];
  }
  if (!any && !positive.empty()) nontrivial[positive[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(positive.size()) - 1))]] = true;

  std::vector<Filtration> filtrations;
  std::vector<std::size_t> shared_dims = random_dims(r, rng);
  std::vector<Subspace> shared_flag = random_flag(r, shared_dims, opts.flag_height, rng);
  const std::size_t shift = candidate / std::max<std::size_t>(1, opts.strategies.size());
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (!nontrivial[i] || r < 2) {
      filtrations.push_back(Filtration::trivial(r));
      continue;
    }
    switch (strategy) {
      case Strategy::Coincident:
        filtrations.push_back(placeholder_filtration(shared_flag));
        break;
      case Strategy::Generic: {
        auto dims = coin(rng, 0.5) ? shared_dims : random_dims(r, rng);
        filtrations.push_back(placeholder_filtration(moment_flag(r, i, shift % 7, dims)));
        break;
      }
      default:
        filtrations.push_back(placeholder_filtration(random_flag(r, random_dims(r, rng), opts.flag_height, rng)));
    }
  }
  return FilteredConfiguration(std::move(filtrations));
}

struct Evaluated {
  FilteredConfiguration configuration;
  Rat c2;
  Rat norm_sq;
  Rat ratio;
  double float_ratio;
  StabilityVerdict verdict;
  bool attained;
};

struct CandidateOutcome {
  enum class Kind { NoFreeWeights, Infeasible, Unstable, Stable, Failed } kind = Kind::Failed;
  Strategy strategy = Strategy::Random;
  std::optional<Evaluated> result;
  std::optional<TheoremViolationRecord> violation;
  bool heuristic_negative = false;
  std::size_t collapse_retries = 0;
  std::size_t cutting_planes = 0;
  double bridge_error = 0;
};

inline bool uses_exact_check(std::size_t r, const StabilityMode& mode) {
  return r <= 2 && !std::holds_alternative<Heuristic>(mode);
}

inline StabilityMode search_mode(std::size_t r, const SearchOptions& opts, std::uint64_t seed, std::size_t samples) {
  if (uses_exact_check(r, opts.stability_mode)) return r == 2 ? StabilityMode{ExactRank2{}} : StabilityMode{Auto{}};
  return Heuristic{samples, seed};
}

inline double float_ratio(const QuadraticPair& qp, const ExactWeights& w) {
  std::vector<Rat> flat = w.flatten();
  const std::size_t n = flat.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double wi = flat[i].to_double();
    den += qp.b_diagonal[i].to_double() * wi * wi;
    for (std::size_t j = 0; j < n; ++j) num += wi * qp.a[i][j].to_double() * flat[j].to_double();
  }
  return num / den;
}

inline CandidateOutcome evaluate_candidate(std::size_t candidate, const DivisorConfiguration& config, std::size_t r,
                                           const SearchOptions& opts) {
  CandidateOutcome out;
  out.strategy = opts.strategies[candidate % opts.strategies.size()];
  FilteredConfiguration shape = make_shape(out.strategy, candidate, config, r, opts);
  CoordinateLayout layout = CoordinateLayout::of(shape);
  if (layout.free_dimension() == 0) {
    out.kind = CandidateOutcome::Kind::NoFreeWeights;
    return out;
  }
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (!shape[i].is_trivial() && config.degree(i).sign() <= 0) {
      out.kind = CandidateOutcome::Kind::NoFreeWeights;
      return out;
    }

  const bool exact = uses_exact_check(r, opts.stability_mode);
  AssembleOptions assemble;
  assemble.seed = stream_seed(opts.seed, {0xa55e, candidate});
  QuadraticPair qp = assemble_quadratics(shape, config, assemble);
  InnerOptions inner_opts;
  inner_opts.seed = stream_seed(opts.seed, {0x1e4, candidate});

  for (std::size_t round = 0; round <= opts.cutting_rounds; ++round) {
    InnerResult inner;
    try {
      inner = inner_minimize(qp, opts.tolerance, opts.max_iter, inner_opts);
    } catch (const NumericalError&) {
      out.kind = CandidateOutcome::Kind::Failed;
      return out;
    }
    if (!inner.feasible) {
      out.kind = CandidateOutcome::Kind::Infeasible;
      return out;
    }
    bool cut_added = false;
    std::vector<double> pulls = inner.boundary_flag ? std::vector<double>{0.02, 0.1, 0.3} : std::vector<double>{0.0};
    for (double pull : pulls) {
      WeightVector w = inner.boundary_flag ? pull_inside(inner, pull) : inner.weights;
      for (long den = opts.max_denominator; den <= opts.max_denominator * 256; den *= 4) {
        ExactWeights ex;
        try {
          ex = rationalize(w, den);
        } catch (const OrderingCollapse&) {
          ++out.collapse_retries;
          continue;
        }
        FilteredConfiguration fc = apply_weights(shape, ex);
        StabilityOptions sopts;
        sopts.record_observations = false;
        StabilityMode mode = search_mode(r, opts, stream_seed(opts.seed, {0x57ab, candidate, round}),
                                         std::min(opts.search_samples, opts.final_samples));
        StabilityVerdict verdict = check_stability(fc, config, mode, sopts);
        if (verdict.status == StabilityStatus::Stable) {
          Evaluated e{fc, c2_trivial(fc, config), norm_sq(fc, config), Rat(), 0.0, verdict, !inner.boundary_flag};
          if (e.norm_sq.sign() <= 0) {
            out.kind = CandidateOutcome::Kind::NoFreeWeights;
            return out;
          }
          e.ratio = e.c2 / e.norm_sq;
          e.float_ratio = float_ratio(qp, ex);
          double exact_ratio = e.ratio.to_double();
          out.bridge_error = std::abs(e.float_ratio - exact_ratio) / std::max(std::abs(exact_ratio), 1e-300);
          if (exact_ratio == 0) out.bridge_error = std::abs(e.float_ratio);
          if (e.c2.sign() < 0) {
            if (verdict.certainty == Certainty::Exact) {
              out.violation = TheoremViolationRecord{candidate, fc, e.c2};
            } else {
              out.heuristic_negative = true;
            }
            out.kind = CandidateOutcome::Kind::Unstable;
            return out;
          }
          out.kind = CandidateOutcome::Kind::Stable;
          out.result = std::move(e);
          return out;
        }
        if (!exact && verdict.witness && add_stability_row(qp, verdict.witness->subspace, shape, config)) {
          ++out.cutting_planes;
          cut_added = true;
          break;
        }
      }
      if (cut_added) break;
    }
    if (!cut_added) break;
  }
  out.kind = CandidateOutcome::Kind::Unstable;
  return out;
}

inline bool better(const Evaluated& a, const Evaluated& b) {
  if (a.ratio != b.ratio) return a.ratio < b.ratio;
  return lexicographic_key(a.configuration) < lexicographic_key(b.configuration);
}

}  // namespace detail

/// Best stable balanced configuration found within `budget` candidate flag
/// shapes. Deterministic for fixed seed and budget, independent of workers.
inline UpsilonEstimate outer_search(const DivisorConfiguration& config, std::size_t r, const SearchOptions& opts) {
  require_valid(config);
  if (r == 0) throw InvalidArgument("rank must be positive");
  if (opts.budget == 0) throw InvalidArgument("budget must be at least 1");
  if (opts.strategies.empty()) throw InvalidArgument("no search strategies selected");
  for (const auto& shape : opts.user_shapes) {
    require_shape(shape, config);
    if (shape.rank() != r) throw DimensionMismatch("user-supplied shape has rank " + std::to_string(shape.rank()));
  }

  auto outcomes = parallel_map(opts.budget, opts.workers, [&](std::size_t c) {
    return detail::evaluate_candidate(c, config, r, opts);
  });

  SearchLog log;
  std::vector<TheoremViolationRecord> violations;
  std::vector<std::size_t> stable;
  std::optional<std::size_t> running;
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    auto& o = outcomes[c];
    ++log.evaluated;
    ++log.per_strategy[to_string(o.strategy)];
    log.collapse_retries += o.collapse_retries;
    log.cutting_planes += o.cutting_planes;
    if (o.heuristic_negative) ++log.heuristic_negative;
    if (o.violation) violations.push_back(*o.violation);
    using Kind = detail::CandidateOutcome::Kind;
    switch (o.kind) {
      case Kind::NoFreeWeights: ++log.no_free_weights; break;
      case Kind::Infeasible: ++log.infeasible; break;
      case Kind::Unstable: ++log.unstable; break;
      case Kind::Failed: ++log.failed; break;
      case Kind::Stable:
        ++log.stable;
        if (o.result->attained) ++log.interior_minima;
        log.bridge_max_relative_error = std::max(log.bridge_max_relative_error, o.bridge_error);
        stable.push_back(c);
        if (!running || detail::better(*o.result, *outcomes[*running].result)) {
          if (!running || o.result->ratio < outcomes[*running].result->ratio)
            log.improvements.emplace_back(c, o.result->ratio);
          running = c;
        }
        break;
    }
  }

  std::sort(stable.begin(), stable.end(),
            [&](std::size_t a, std::size_t b) { return detail::better(*outcomes[a].result, *outcomes[b].result); });

  const bool exact = detail::uses_exact_check(r, opts.stability_mode);
  StabilityOptions final_opts;
  final_opts.workers = opts.workers;
  for (std::size_t c : stable) {
    auto& e = *outcomes[c].result;
    StabilityMode mode = exact ? e.verdict.certainty == Certainty::Exact && r == 2 ? StabilityMode{ExactRank2{}}
                                                                                   : StabilityMode{Auto{}}
                               : StabilityMode{Heuristic{opts.final_samples, opts.seed}};
    StabilityVerdict verdict = check_stability(e.configuration, config, mode, final_opts);
    if (verdict.status != StabilityStatus::Stable) {
      ++log.verification_rejections;
      continue;
    }
    UpsilonEstimate est{e.configuration, e.c2,  e.norm_sq, e.ratio, e.float_ratio, std::move(verdict),
                        e.attained,      outcomes[c].strategy, c,  std::move(log), std::move(violations)};
    return est;
  }

  std::string summary = "no stable configuration found among " + std::to_string(log.evaluated) +
                        " candidates (no free weights " + std::to_string(log.no_free_weights) + ", infeasible " +
                        std::to_string(log.infeasible) + ", unstable " + std::to_string(log.unstable) +
                        ", failed " + std::to_string(log.failed) + ", rejected in verification " +
                        std::to_string(log.verification_rejections) + ")";
  if (!violations.empty())
    throw TheoremViolation(summary + "; " + std::to_string(violations.size()) +
                           " exactly stable candidates had negative c2");
  throw NoStableConfiguration(summary);
}

}  // namespace upsilon
