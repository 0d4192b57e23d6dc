#pragma once

// Polynomial node dynamics and iteration of the full N-dimensional map
//   x_i[t+1] = F_i(x_i[t]) + sum_j A_ij G_i(x_i[t], x_j[t]).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "netcollapse/network.hpp"

namespace netcollapse {

enum class ClampMode { none, nonnegative, unit_interval };

/// One monomial x_i^(p-1) x_j^(q-1) of the coupling function with per-node coefficients.
struct CouplingTerm {
  int p = 1;
  int q = 1;
  Vector coeff;
};

/// Per-node polynomial self- and coupling-dynamics.
///
/// Column k of `self` (0-based) multiplies x_i^k in F_i, so the self order m is
/// `self.cols()`. The collapsed coupling table C has c_{i,l} = sum of d_{p,q}
/// over p + q - 1 = l.
class DynamicsModel {
 public:
  DynamicsModel(Matrix self, std::vector<CouplingTerm> coupling,
                ClampMode default_clamp = ClampMode::none)
      : self_(std::move(self)), coupling_(std::move(coupling)), clamp_(default_clamp) {
    if (self_.cols() < 1 || self_.rows() < 1) throw InvalidSpec("dynamics: need N, m >= 1");
    if (!self_.allFinite()) throw InvalidSpec("dynamics: non-finite self coefficient");
    if (coupling_.empty())
      coupling_.push_back({1, 1, Vector::Zero(self_.rows())});
    for (const auto& t : coupling_) {
      if (t.p < 1 || t.q < 1) throw InvalidSpec("dynamics: monomial exponents start at 1");
      if (t.coeff.size() != self_.rows()) throw InvalidSpec("dynamics: coefficient length != N");
      if (!t.coeff.allFinite()) throw InvalidSpec("dynamics: non-finite coupling coefficient");
    }
    int n = 1;
    for (const auto& t : coupling_) n = std::max(n, t.p + t.q - 1);
    collapsed_ = Matrix::Zero(self_.rows(), n);
    for (const auto& t : coupling_) collapsed_.col(t.p + t.q - 2) += t.coeff;
  }

  std::size_t nodes() const { return static_cast<std::size_t>(self_.rows()); }
  int self_order() const { return static_cast<int>(self_.cols()); }
  int coupling_order() const { return static_cast<int>(collapsed_.cols()); }
  const Matrix& self_coeffs() const { return self_; }
  const std::vector<CouplingTerm>& coupling_terms() const { return coupling_; }
  const Matrix& collapsed_coupling() const { return collapsed_; }
  ClampMode default_clamp() const { return clamp_; }

  double self_value(std::size_t i, double x) const {
    double acc = 0.0;
    for (Eigen::Index k = self_.cols() - 1; k >= 0; --k)
      acc = acc * x + self_(static_cast<Eigen::Index>(i), k);
    return acc;
  }

  double coupling_value(std::size_t i, double xi, double xj) const {
    double acc = 0.0;
    for (const auto& t : coupling_)
      acc += t.coeff(static_cast<Eigen::Index>(i)) * std::pow(xi, t.p - 1) *
             std::pow(xj, t.q - 1);
    return acc;
  }

 private:
  Matrix self_;
  std::vector<CouplingTerm> coupling_;
  Matrix collapsed_;
  ClampMode clamp_;
};

/// Discrete generalized Lotka-Volterra: F_i = (1 + alpha_i) x, G_i = x_i x_j.
inline DynamicsModel make_glv(const Vector& alpha) {
  Matrix self = Matrix::Zero(alpha.size(), 2);
  self.col(1) = alpha.array() + 1.0;
  return DynamicsModel(std::move(self), {{2, 2, Vector::Ones(alpha.size())}},
                       ClampMode::nonnegative);
}

/// Discrete SIS: F_i = (1 - e_i) x, G_i = (1 - x_i) x_j.
inline DynamicsModel make_sis(const Vector& recovery) {
  Matrix self = Matrix::Zero(recovery.size(), 2);
  self.col(1) = 1.0 - recovery.array();
  const auto n = recovery.size();
  return DynamicsModel(std::move(self),
                       {{1, 2, Vector::Ones(n)}, {2, 2, -Vector::Ones(n)}},
                       ClampMode::unit_interval);
}

struct SimulationSettings {
  std::size_t max_steps = 100000;
  double convergence_tol = 1e-9;
  double divergence_bound = 1e8;
  std::optional<ClampMode> clamp;  // unset: the model's default

  void validate() const {
    if (max_steps < 1) throw InvalidSpec("simulation: max_steps must be >= 1");
    if (!(convergence_tol > 0.0)) throw InvalidSpec("simulation: convergence_tol must be > 0");
    if (!(divergence_bound > 1.0)) throw InvalidSpec("simulation: divergence_bound must be > 1");
  }
};

enum class Status { converged, diverged, max_steps };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::diverged: return "diverged";
    case Status::max_steps: return "max_steps";
  }
  return "unknown";
}

inline std::string to_string(ClampMode c) {
  switch (c) {
    case ClampMode::none: return "none";
    case ClampMode::nonnegative: return "nonnegative";
    case ClampMode::unit_interval: return "unit_interval";
  }
  return "unknown";
}

inline ClampMode clamp_from_string(const std::string& s) {
  if (s == "none") return ClampMode::none;
  if (s == "nonnegative") return ClampMode::nonnegative;
  if (s == "unit_interval") return ClampMode::unit_interval;
  throw InvalidSpec("unknown clamp mode '" + s + "'");
}

struct SteadyStateRecord {
  Vector x_star;
  double x_eff = 0.0;  // NaN when the network carries no weight
  double mean_state = 0.0;
  std::size_t steps = 0;
  Status status = Status::max_steps;
  bool period2 = false;  // last two steps repeat x[t-2] within tolerance
  std::vector<double> d;  // effective parameters, filled by the reduction
};

inline void apply_clamp(Vector& x, ClampMode mode) {
  switch (mode) {
    case ClampMode::none: break;
    case ClampMode::nonnegative: x = x.cwiseMax(0.0); break;
    case ClampMode::unit_interval: x = x.cwiseMax(0.0).cwiseMin(1.0); break;
  }
}

namespace detail {

inline Vector power(const Vector& x, int k) {
  Vector out = Vector::Ones(x.size());
  for (int i = 0; i < k; ++i) out = out.cwiseProduct(x);
  return out;
}

}  // namespace detail

/// One application of the full map.
inline Vector step_full(const InteractionMatrix& a, const DynamicsModel& model, const Vector& x,
                        ClampMode clamp) {
  const auto n = static_cast<Eigen::Index>(a.size());
  if (x.size() != n || static_cast<Eigen::Index>(model.nodes()) != n)
    throw InvalidSpec("step_full: state, matrix and model sizes differ");
  const Matrix& self = model.self_coeffs();

  Vector next = self.col(self.cols() - 1);
  for (Eigen::Index k = self.cols() - 2; k >= 0; --k)
    next = next.cwiseProduct(x) + self.col(k);

  // sum_j A_ij x_i^(p-1) x_j^(q-1) = x_i^(p-1) (A x^(q-1))_i
  for (const auto& t : model.coupling_terms()) {
    const Vector field = a.weights() * detail::power(x, t.q - 1);
    next += t.coeff.cwiseProduct(detail::power(x, t.p - 1)).cwiseProduct(field);
  }
  if (!next.allFinite()) throw NonFiniteState("full map produced a non-finite state");
  apply_clamp(next, clamp);
  return next;
}

inline Vector step_full(const InteractionMatrix& a, const DynamicsModel& model, const Vector& x) {
  return step_full(a, model, x, model.default_clamp());
}

/// x_eff of a state, NaN when the mean-field operator is undefined.
inline double effective_state(const InteractionMatrix& a, const Vector& x) {
  try {
    return mean_field(a, x);
  } catch (const ZeroTotalWeight&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Iterates the full map until the sup-norm change drops below the tolerance.
inline SteadyStateRecord simulate(const InteractionMatrix& a, const DynamicsModel& model,
                                  const Vector& x0, const SimulationSettings& settings = {}) {
  settings.validate();
  if (!x0.allFinite()) throw InvalidSpec("simulate: non-finite initial state");
  const ClampMode clamp = settings.clamp.value_or(model.default_clamp());

  SteadyStateRecord rec;
  rec.status = Status::max_steps;
  Vector prev = x0, x = x0;
  std::size_t t = 0;
  for (; t < settings.max_steps; ++t) {
    Vector next;
    try {
      next = step_full(a, model, x, clamp);
    } catch (const NonFiniteState&) {
      rec.status = Status::diverged;
      break;
    }
    // x is recorded as the steady state, so re-stepping it reproduces this change.
    if ((next - x).cwiseAbs().maxCoeff() < settings.convergence_tol) {
      rec.status = Status::converged;
      break;
    }
    if (next.cwiseAbs().maxCoeff() > settings.divergence_bound) {
      rec.status = Status::diverged;
      x = std::move(next);
      ++t;
      break;
    }
    prev = std::move(x);
    x = std::move(next);
  }
  rec.steps = t;
  if (rec.status == Status::max_steps && t >= 2) {
    try {
      const Vector ahead = step_full(a, model, x, clamp);
      rec.period2 = (ahead - prev).cwiseAbs().maxCoeff() < settings.convergence_tol;
    } catch (const NonFiniteState&) {
    }
  }
  rec.x_star = std::move(x);
  rec.mean_state = rec.x_star.mean();
  rec.x_eff = effective_state(a, rec.x_star);
  return rec;
}

/// Interior GLV stationary state: solves A x* = -alpha.
inline Vector glv_analytic_fixed_point(const InteractionMatrix& a, const Vector& alpha) {
  if (alpha.size() != static_cast<Eigen::Index>(a.size()))
    throw InvalidSpec("glv_analytic_fixed_point: alpha has wrong length");
  Eigen::FullPivLU<Matrix> lu(a.weights());
  if (!lu.isInvertible()) throw SingularMatrix("interaction matrix is singular");
  return lu.solve(-alpha);
}

}  // namespace netcollapse
