#pragma once

// Chebyshev interpolation of node dynamics, returned in the monomial basis the
// reduction works with.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "netcollapse/dynamics.hpp"

namespace netcollapse {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  void validate() const {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
      throw InvalidSpec("interval must satisfy lo < hi");
  }
};

/// [min(0, observed min), max(1, observed max)]
inline Interval default_fit_interval(std::span<const double> observed) {
  Interval iv{0.0, 1.0};
  for (double v : observed) {
    if (!std::isfinite(v)) continue;
    iv.lo = std::min(iv.lo, v);
    iv.hi = std::max(iv.hi, v);
  }
  return iv;
}

struct ChebyshevFit {
  Interval interval;
  int degree = 0;
  std::vector<double> coeffs;  // coeffs[k] multiplies x^k
  double residual = 0.0;       // max |fit - f| on the oversampled grid

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
};

struct ChebyshevFit2D {
  Interval interval;
  int degree_x = 0;
  int degree_y = 0;
  Matrix d;                    // d(p-1, q-1) multiplies x_i^(p-1) x_j^(q-1)
  std::vector<double> collapsed;  // collapsed[l-1] = sum of d_{p,q} over p + q - 1 = l
  double residual = 0.0;

  double operator()(double xi, double xj) const {
    double acc = 0.0;
    for (Eigen::Index p = d.rows() - 1; p >= 0; --p) {
      double row = 0.0;
      for (Eigen::Index q = d.cols() - 1; q >= 0; --q) row = row * xj + d(p, q);
      acc = acc * xi + row;
    }
    return acc;
  }
};

namespace detail {

inline double chebyshev_node(int k, int count) {
  return std::cos(std::numbers::pi * (k + 0.5) / count);
}

/// Monomial coefficients (in x) of T_0..T_degree evaluated at t = (x - mid) / half.
inline std::vector<std::vector<double>> chebyshev_monomials(int degree, const Interval& iv) {
  // T_j in the variable t.
  std::vector<std::vector<double>> t_basis(degree + 1, std::vector<double>(degree + 1, 0.0));
  t_basis[0][0] = 1.0;
  if (degree >= 1) t_basis[1][1] = 1.0;
  for (int j = 2; j <= degree; ++j)
    for (int k = 0; k <= j; ++k)
      t_basis[j][k] = (k > 0 ? 2.0 * t_basis[j - 1][k - 1] : 0.0) - t_basis[j - 2][k];

  // t^k = (s x + o)^k expanded in x.
  const double half = 0.5 * (iv.hi - iv.lo);
  const double mid = 0.5 * (iv.hi + iv.lo);
  const double s = 1.0 / half, o = -mid / half;
  std::vector<std::vector<double>> t_pow(degree + 1, std::vector<double>(degree + 1, 0.0));
  t_pow[0][0] = 1.0;
  for (int k = 1; k <= degree; ++k)
    for (int i = 0; i <= k; ++i)
      t_pow[k][i] = o * t_pow[k - 1][i] + (i > 0 ? s * t_pow[k - 1][i - 1] : 0.0);

  std::vector<std::vector<double>> out(degree + 1, std::vector<double>(degree + 1, 0.0));
  for (int j = 0; j <= degree; ++j)
    for (int k = 0; k <= j; ++k)
      if (t_basis[j][k] != 0.0)
        for (int i = 0; i <= k; ++i) out[j][i] += t_basis[j][k] * t_pow[k][i];
  return out;
}

inline double map_node(double t, const Interval& iv) {
  return 0.5 * (iv.hi + iv.lo) + 0.5 * (iv.hi - iv.lo) * t;
}

inline std::vector<double> chebyshev_coefficients(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  std::vector<double> c(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k)
      acc += values[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
    c[j] = (j == 0 ? 1.0 : 2.0) * acc / n;
  }
  return c;
}

inline std::vector<double> oversampled_grid(const Interval& iv, int degree) {
  const int m = 10 * (degree + 1) + 1;
  std::vector<double> grid(m);
  for (int k = 0; k < m; ++k) grid[k] = iv.lo + (iv.hi - iv.lo) * k / (m - 1);
  return grid;
}

}  // namespace detail

/// Degree-`degree` interpolant of f at the Chebyshev nodes of `interval`.
inline ChebyshevFit chebyshev_fit_1d(const std::function<double(double)>& f, Interval interval,
                                     int degree) {
  interval.validate();
  if (degree < 0) throw InvalidSpec("chebyshev_fit_1d: degree must be >= 0");
  const int n = degree + 1;
  std::vector<double> values(n);
  for (int k = 0; k < n; ++k) {
    values[k] = f(detail::map_node(detail::chebyshev_node(k, n), interval));
    if (!std::isfinite(values[k])) throw NonFiniteSample("chebyshev_fit_1d: non-finite sample");
  }
  const auto cheb = detail::chebyshev_coefficients(values);
  const auto basis = detail::chebyshev_monomials(degree, interval);

  ChebyshevFit fit{interval, degree, std::vector<double>(n, 0.0), 0.0};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) fit.coeffs[i] += cheb[j] * basis[j][i];

  for (double x : detail::oversampled_grid(interval, degree)) {
    const double fx = f(x);
    if (!std::isfinite(fx)) throw NonFiniteSample("chebyshev_fit_1d: non-finite sample");
    fit.residual = std::max(fit.residual, std::abs(fit(x) - fx));
  }
  return fit;
}

/// Tensor-product interpolant of g(x_i, x_j) on interval x interval; the
/// collapsed coefficients feed the reduced map.
inline ChebyshevFit2D chebyshev_fit_2d(const std::function<double(double, double)>& g,
                                       Interval interval, int degree_x, int degree_y) {
  interval.validate();
  if (degree_x < 0 || degree_y < 0) throw InvalidSpec("chebyshev_fit_2d: degrees must be >= 0");
  const int nx = degree_x + 1, ny = degree_y + 1;

  Matrix samples(nx, ny);
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < ny; ++b) {
      const double xi = detail::map_node(detail::chebyshev_node(a, nx), interval);
      const double xj = detail::map_node(detail::chebyshev_node(b, ny), interval);
      samples(a, b) = g(xi, xj);
      if (!std::isfinite(samples(a, b)))
        throw NonFiniteSample("chebyshev_fit_2d: non-finite sample");
    }

  // Transform along y for every x node, then along x.
  Matrix partial(nx, ny);
  for (int a = 0; a < nx; ++a) {
    std::vector<double> row(ny);
    for (int b = 0; b < ny; ++b) row[b] = samples(a, b);
    const auto c = detail::chebyshev_coefficients(row);
    for (int b = 0; b < ny; ++b) partial(a, b) = c[b];
  }
  Matrix cheb(nx, ny);
  for (int b = 0; b < ny; ++b) {
    std::vector<double> col(nx);
    for (int a = 0; a < nx; ++a) col[a] = partial(a, b);
    const auto c = detail::chebyshev_coefficients(col);
    for (int a = 0; a < nx; ++a) cheb(a, b) = c[a];
  }

  const auto bx = detail::chebyshev_monomials(degree_x, interval);
  const auto by = detail::chebyshev_monomials(degree_y, interval);
  ChebyshevFit2D fit;
  fit.interval = interval;
  fit.degree_x = degree_x;
  fit.degree_y = degree_y;
  fit.d = Matrix::Zero(nx, ny);
  for (int j = 0; j < nx; ++j)
    for (int k = 0; k < ny; ++k)
      for (int p = 0; p < nx; ++p)
        for (int q = 0; q < ny; ++q) fit.d(p, q) += cheb(j, k) * bx[j][p] * by[k][q];

  fit.collapsed.assign(nx + ny - 1, 0.0);
  for (int p = 0; p < nx; ++p)
    for (int q = 0; q < ny; ++q) fit.collapsed[p + q] += fit.d(p, q);

  const auto grid_x = detail::oversampled_grid(interval, degree_x);
  const auto grid_y = detail::oversampled_grid(interval, degree_y);
  for (double xi : grid_x)
    for (double xj : grid_y) {
      const double gv = g(xi, xj);
      if (!std::isfinite(gv)) throw NonFiniteSample("chebyshev_fit_2d: non-finite sample");
      fit.residual = std::max(fit.residual, std::abs(fit(xi, xj) - gv));
    }
  return fit;
}

/// Node-indexed dynamics to be approximated.
struct NodeFunctions {
  std::function<double(std::size_t, double)> self;
  std::function<double(std::size_t, double, double)> coupling;
};

struct FitOptions {
  Interval interval;
  int self_degree = 2;
  int coupling_degree_x = 2;
  int coupling_degree_y = 2;
  double chop = 1e-12;  // coefficients below chop * max|coefficient| are zeroed
  ClampMode clamp = ClampMode::none;
};

/// Builds a polynomial DynamicsModel by fitting every node's F_i and G_i.
inline DynamicsModel fit_dynamics(std::size_t nodes, const NodeFunctions& fns,
                                  const FitOptions& opt) {
  if (nodes < 1) throw InvalidSpec("fit_dynamics: need at least one node");
  const auto n = static_cast<Eigen::Index>(nodes);
  Matrix self(n, opt.self_degree + 1);
  std::vector<CouplingTerm> terms;
  for (int p = 1; p <= opt.coupling_degree_x + 1; ++p)
    for (int q = 1; q <= opt.coupling_degree_y + 1; ++q)
      terms.push_back({p, q, Vector::Zero(n)});

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto node = static_cast<std::size_t>(i);
    const auto f = chebyshev_fit_1d([&](double x) { return fns.self(node, x); }, opt.interval,
                                    opt.self_degree);
    double fscale = 1.0;
    for (double c : f.coeffs) fscale = std::max(fscale, std::abs(c));
    for (int k = 0; k <= opt.self_degree; ++k)
      self(i, k) = std::abs(f.coeffs[k]) < opt.chop * fscale ? 0.0 : f.coeffs[k];

    const auto g = chebyshev_fit_2d([&](double a, double b) { return fns.coupling(node, a, b); },
                                    opt.interval, opt.coupling_degree_x, opt.coupling_degree_y);
    const double gscale = std::max(1.0, g.d.cwiseAbs().maxCoeff());
    for (auto& t : terms) {
      const double v = g.d(t.p - 1, t.q - 1);
      t.coeff(i) = std::abs(v) < opt.chop * gscale ? 0.0 : v;
    }
  }
  std::erase_if(terms, [](const CouplingTerm& t) { return t.coeff.isZero(0.0); });
  return DynamicsModel(std::move(self), std::move(terms), opt.clamp);
}

}  // namespace netcollapse
