#pragma once

// One-dimensional effective map x_eff[t+1] = sum_s d_s x_eff^(s-1), its fixed
// points, and the distance of simulated states from them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "netcollapse/dynamics.hpp"

namespace netcollapse {

inline constexpr double kRootTol = 1e-10;
inline constexpr double kImagTol = 1e-8;

struct EffectiveSystem {
  int order = 0;               // S = max(m, n)
  std::vector<double> d;       // d[s-1] = d_s
  double a_eff = 0.0;
  std::vector<double> b_eff;   // b_eff[k-1] = B^k_eff
  std::vector<double> c_eff;   // c_eff[l-1] = C^l_eff
};

/// Mean-field averages of A, B and C assembled into d_1..d_S:
/// d_s = B^s_eff + A_eff C^s_eff where both exist, otherwise whichever term does.
inline EffectiveSystem build_effective(const InteractionMatrix& a, const DynamicsModel& model) {
  if (model.nodes() != a.size()) throw InvalidSpec("build_effective: model and matrix sizes differ");
  const MeanField mf(a);
  EffectiveSystem sys;
  sys.a_eff = mf(in_degrees(a));
  for (Eigen::Index k = 0; k < model.self_coeffs().cols(); ++k)
    sys.b_eff.push_back(mf(model.self_coeffs().col(k)));
  for (Eigen::Index l = 0; l < model.collapsed_coupling().cols(); ++l)
    sys.c_eff.push_back(mf(model.collapsed_coupling().col(l)));

  const int m = static_cast<int>(sys.b_eff.size());
  const int n = static_cast<int>(sys.c_eff.size());
  sys.order = std::max(m, n);
  sys.d.assign(sys.order, 0.0);
  for (int s = 0; s < sys.order; ++s) {
    if (s < m) sys.d[s] += sys.b_eff[s];
    if (s < n) sys.d[s] += sys.a_eff * sys.c_eff[s];
  }
  return sys;
}

/// Horner evaluation of sum_s d_s x^(s-1).
inline double polynomial_value(std::span<const double> d, double x) {
  double acc = 0.0;
  for (auto it = d.rbegin(); it != d.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline double polynomial_derivative(std::span<const double> d, double x) {
  double acc = 0.0;
  for (std::size_t s = d.size(); s-- > 1;) acc = acc * x + static_cast<double>(s) * d[s];
  return acc;
}

inline double effective_step(const EffectiveSystem& sys, double x) {
  return polynomial_value(sys.d, x);
}

struct FixedPointReport {
  std::vector<double> roots;        // ascending
  std::vector<double> multipliers;  // f'(root)
  std::vector<bool> stable;         // |f'(root)| < 1
};

namespace detail {

inline std::vector<double> real_roots(std::vector<double> r) {
  double scale = 0.0;
  for (double c : r) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) throw DegeneratePolynomial("every point is a fixed point");
  while (std::abs(r.back()) <= 1e-15 * scale) r.pop_back();

  std::vector<double> roots;
  const std::size_t degree = r.size() - 1;
  if (degree == 0) return roots;
  if (degree == 1) {
    roots.push_back(-r[0] / r[1]);
  } else if (degree == 2) {
    const double a = r[2], b = r[1], c = r[0];
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0) {
        roots.push_back(q / a);
        roots.push_back(c / q);
      } else {
        roots.push_back(0.0);  // b == c == 0
      }
    } else if (std::sqrt(-disc) / (2.0 * std::abs(a)) < kImagTol) {
      roots.push_back(-b / (2.0 * a));
    }
  } else {
    const auto n = static_cast<Eigen::Index>(degree);
    Matrix companion = Matrix::Zero(n, n);
    companion.block(1, 0, n - 1, n - 1).setIdentity();
    for (Eigen::Index k = 0; k < n; ++k) companion(k, n - 1) = -r[k] / r[degree];
    Eigen::EigenSolver<Matrix> es(companion, false);
    for (const auto& z : es.eigenvalues()) {
      if (std::abs(z.imag()) >= kImagTol * std::max(1.0, std::abs(z.real()))) continue;
      double x = z.real();
      for (int it = 0; it < 50; ++it) {
        const double fx = polynomial_value(r, x);
        const double dfx = polynomial_derivative(r, x);
        if (dfx == 0.0) break;
        const double step = fx / dfx;
        x -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
      }
      roots.push_back(x);
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double u, double v) {
                            return std::abs(u - v) <= 1e-12 * std::max(1.0, std::abs(u));
                          }),
              roots.end());
  return roots;
}

}  // namespace detail

/// Real fixed points of x -> sum_s d_s x^(s-1) and their multipliers.
inline FixedPointReport fixed_points(std::span<const double> d) {
  if (d.empty()) throw InvalidSpec("fixed_points: need at least one coefficient");
  std::vector<double> residual(d.begin(), d.end());
  if (residual.size() < 2) residual.resize(2, 0.0);
  residual[1] -= 1.0;

  FixedPointReport rep;
  rep.roots = detail::real_roots(residual);
  for (double r : rep.roots) {
    const double mult = polynomial_derivative(d, r);
    rep.multipliers.push_back(mult);
    rep.stable.push_back(std::abs(mult) < 1.0);
  }
  return rep;
}

inline FixedPointReport fixed_points(const EffectiveSystem& sys) { return fixed_points(sys.d); }

/// The manifold point a simulated x_eff is compared against.
struct ManifoldProjection {
  double root = 0.0;
  double multiplier = 0.0;
  bool stable = false;
  double err = 0.0;
};

/// Nearest stable root to x_eff, or the nearest root when none is stable.
inline ManifoldProjection project_onto_manifold(double x_eff, const FixedPointReport& rep) {
  if (rep.roots.empty()) throw NoManifoldSolution("reduced map has no real fixed point");
  if (!std::isfinite(x_eff)) throw InvalidSpec("project_onto_manifold: x_eff is not finite");
  const bool any_stable = std::find(rep.stable.begin(), rep.stable.end(), true) != rep.stable.end();
  std::size_t best = rep.roots.size();
  for (std::size_t k = 0; k < rep.roots.size(); ++k) {
    if (any_stable && !rep.stable[k]) continue;
    if (best == rep.roots.size() ||
        std::abs(rep.roots[k] - x_eff) < std::abs(rep.roots[best] - x_eff))
      best = k;
  }
  return {rep.roots[best], rep.multipliers[best], rep.stable[best],
          std::abs(x_eff - rep.roots[best])};
}

inline double collapse_error(double x_eff, const EffectiveSystem& sys) {
  return project_onto_manifold(x_eff, fixed_points(sys)).err;
}

inline double collapse_error(const SteadyStateRecord& record, const EffectiveSystem& sys) {
  return collapse_error(record.x_eff, sys);
}

}  // namespace netcollapse
