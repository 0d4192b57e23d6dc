#pragma once

// Closed-form random-matrix predictions for the effective parameters, the GLV
// effective state and the collapse error.

#include <cmath>
#include <cstddef>
#include <limits>

#include "netcollapse/generators.hpp"
#include "netcollapse/network.hpp"

namespace netcollapse {

struct GlvEnsemble {
  std::size_t S = 50;
  double mu_alpha = 1.0;
  double sigma_alpha = 1.0 / 3.0;
  double mu_A = -0.02;
  double sigma_A = 0.0;
  double rho_A = 0.0;
  double mu_D = 1.0;
  double sigma_D = 1.0 / 3.0;

  /// (S - 1) mu_A - mu_D
  double M() const { return (static_cast<double>(S) - 1.0) * mu_A - mu_D; }
};

enum class Branch { nonzero, zero };

struct DiagonalMoments {
  double mu_D = 0.0;
  double sigma_D = 0.0;
};

namespace detail {

inline void require_nonzero(double value, double scale, const char* what) {
  if (!std::isfinite(value) || std::abs(value) <= 1e-14 * std::max(1.0, std::abs(scale)))
    throw ZeroDenominator(what);
}

inline double a_eff_rmt_sums(const MatrixStats& stats, double s, double sum_neg_d,
                             double sum_d_sq) {
  const double rho_var = stats.rho_A.value_or(0.0) * stats.sigma_A * stats.sigma_A;
  const double mu = stats.mu_A;
  const double num =
      sum_d_sq + (s - 1.0) * (2.0 * mu * sum_neg_d + s * (s - 1.0) * mu * mu + s * rho_var);
  const double den = sum_neg_d + s * (s - 1.0) * mu;
  require_nonzero(den, std::abs(sum_neg_d) + s * s * std::abs(mu), "a_eff_rmt: zero denominator");
  return num / den;
}

}  // namespace detail

/// A_eff from off-diagonal moments and the moments of the diagonal magnitudes D_i.
inline double a_eff_rmt(const MatrixStats& stats, std::size_t S, const DiagonalMoments& diag) {
  const double s = static_cast<double>(S);
  return detail::a_eff_rmt_sums(stats, s, -s * diag.mu_D,
                                s * (diag.mu_D * diag.mu_D + diag.sigma_D * diag.sigma_D));
}

/// A_eff from off-diagonal moments and a realized diagonal (entries A_ii = -D_i).
inline double a_eff_rmt(const MatrixStats& stats, const Vector& diagonal) {
  return detail::a_eff_rmt_sums(stats, static_cast<double>(diagonal.size()), diagonal.sum(),
                                diagonal.squaredNorm());
}

/// Realized route: moments measured from the matrix itself.
inline double a_eff_rmt(const InteractionMatrix& a) {
  return a_eff_rmt(matrix_stats(a), Vector(a.weights().diagonal()));
}

struct GlobalMoments {
  double mu_A = 0.0;
  double sigma_A = 0.0;
};

/// Global moments of a matrix whose entries are non-zero with probability C.
inline GlobalMoments connectivity_rescale(double mu_X, double sigma_X, double C) {
  if (!(C > 0.0 && C <= 1.0)) throw InvalidSpec("connectivity must lie in (0, 1]");
  return {C * mu_X, std::sqrt(C * sigma_X * sigma_X + C * (1.0 - C) * mu_X * mu_X)};
}

/// Ensemble moments of generate_random_matrix output.
inline MatrixStats ensemble_moments(const RandomMatrixSpec& spec) {
  spec.validate();
  const auto g = connectivity_rescale(spec.mu_X, spec.sigma_X, spec.connectivity);
  MatrixStats s;
  s.size = spec.size;
  s.mu_A = g.mu_A;
  s.sigma_A = g.sigma_A;
  if (g.sigma_A > 0.0)
    s.rho_A = spec.connectivity * spec.connectivity * spec.rho * spec.sigma_X * spec.sigma_X /
              (g.sigma_A * g.sigma_A);
  s.mu_D = spec.mu_D;
  s.sigma_D = spec.sigma_D;
  s.connectivity = spec.connectivity;
  s.mu_X = spec.mu_X;
  s.sigma_X = spec.sigma_X;
  return s;
}

inline GlvEnsemble glv_ensemble(const RandomMatrixSpec& spec, double mu_alpha, double sigma_alpha) {
  const MatrixStats m = ensemble_moments(spec);
  return {spec.size, mu_alpha, sigma_alpha, m.mu_A, m.sigma_A, m.rho_A.value_or(0.0),
          m.mu_D, m.sigma_D};
}

inline GlvEnsemble glv_ensemble(const MatrixStats& m, double mu_alpha, double sigma_alpha) {
  return {m.size, mu_alpha, sigma_alpha, m.mu_A, m.sigma_A, m.rho_A.value_or(0.0),
          m.mu_D, m.sigma_D};
}

struct GlvEffectiveParams {
  double d2 = 0.0;
  double d3 = 0.0;
};

/// d2 = 1 + mu_alpha, d3 = (M^2 + sigma_D^2) / M.
inline GlvEffectiveParams glv_effective_params(const GlvEnsemble& ens) {
  const double m = ens.M();
  detail::require_nonzero(m, ens.mu_D, "glv_effective_params: M == 0");
  return {1.0 + ens.mu_alpha, (m * m + ens.sigma_D * ens.sigma_D) / m};
}

inline double glv_x_eff_prediction(const GlvEnsemble& ens, Branch branch = Branch::nonzero) {
  const double m = ens.M();
  detail::require_nonzero(m, ens.mu_D, "glv_x_eff_prediction: M == 0");
  return branch == Branch::zero ? 0.0 : -ens.mu_alpha / m;
}

/// Distance between the predicted effective state and the predicted manifold root.
///   nonzero: |mu_alpha sigma_D^2 / (M (M^2 + sigma_D^2))|
///   zero:    |mu_alpha M / (M^2 + sigma_D^2)|
inline double glv_error_prediction(const GlvEnsemble& ens, Branch branch) {
  const double m = ens.M();
  const double var = ens.sigma_D * ens.sigma_D;
  detail::require_nonzero(m, ens.mu_D, "glv_error_prediction: M == 0");
  if (branch == Branch::zero) return std::abs(ens.mu_alpha * m / (m * m + var));
  return std::abs(ens.mu_alpha * var / (m * (m * m + var)));
}

enum class Phase { active, extinct };

/// Mean-field epidemic threshold; a tie counts as extinct.
inline Phase sis_threshold(double e_eff, double a_eff) {
  return a_eff > e_eff ? Phase::active : Phase::extinct;
}

}  // namespace netcollapse
