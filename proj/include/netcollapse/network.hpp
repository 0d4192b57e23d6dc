#pragma once

// Interaction matrices and the degree-weighted mean-field operator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <json.hpp>

#include "netcollapse/errors.hpp"

namespace netcollapse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense N x N weight matrix; entry (i, j) is the influence of node j on node i.
class InteractionMatrix {
 public:
  InteractionMatrix() : InteractionMatrix(Matrix::Zero(1, 1)) {}

  explicit InteractionMatrix(Matrix weights, bool directed = true)
      : weights_(std::move(weights)), directed_(directed) {
    if (weights_.rows() < 1 || weights_.rows() != weights_.cols())
      throw InvalidSpec("interaction matrix must be square with N >= 1");
    if (!weights_.allFinite())
      throw InvalidSpec("interaction matrix has non-finite entries");
  }

  static InteractionMatrix zeros(std::size_t n, bool directed = true) {
    return InteractionMatrix(Matrix::Zero(static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(n)),
                             directed);
  }

  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  bool directed() const { return directed_; }
  const Matrix& weights() const { return weights_; }
  double operator()(std::size_t i, std::size_t j) const {
    return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double total_weight() const { return weights_.sum(); }

  friend bool operator==(const InteractionMatrix& a, const InteractionMatrix& b) {
    return a.directed_ == b.directed_ && a.weights_.rows() == b.weights_.rows() &&
           a.weights_ == b.weights_;
  }

 private:
  Matrix weights_;
  bool directed_ = true;
};

/// s^out_j = sum_i A_ij (column sums).
inline Vector out_degrees(const InteractionMatrix& a) {
  return a.weights().colwise().sum().transpose();
}

/// s^in_i = sum_j A_ij (row sums).
inline Vector in_degrees(const InteractionMatrix& a) {
  return a.weights().rowwise().sum();
}

namespace detail {

// Totals that cancel to rounding noise are treated as zero.
inline bool negligible_total(double total, double magnitude) {
  return total == 0.0 ||
         std::abs(total) <= 64.0 * std::numeric_limits<double>::epsilon() * magnitude;
}

}  // namespace detail

/// Out-degree-weighted average <s^out . x> / <s^out>.
class MeanField {
 public:
  explicit MeanField(const InteractionMatrix& a) : weights_(out_degrees(a)) {
    total_ = weights_.sum();
    if (detail::negligible_total(total_, a.weights().cwiseAbs().sum()))
      throw ZeroTotalWeight("mean-field operator undefined: total out-degree is zero");
  }

  double operator()(const Vector& x) const {
    if (x.size() != weights_.size())
      throw InvalidSpec("mean-field input has wrong length");
    return weights_.dot(x) / total_;
  }

  const Vector& weights() const { return weights_; }

 private:
  Vector weights_;
  double total_ = 0.0;
};

inline double mean_field(const InteractionMatrix& a, const Vector& x) {
  return MeanField(a)(x);
}

/// Effective interaction strength: the mean field of the in-degree vector.
inline double a_eff(const InteractionMatrix& a) {
  return mean_field(a, in_degrees(a));
}

/// Moments of a matrix as used by the random-matrix predictions.
struct MatrixStats {
  std::size_t size = 0;
  double mu_A = 0.0;
  double sigma_A = 0.0;
  std::optional<double> rho_A;  // absent when sigma_A == 0
  double mu_D = 0.0;            // moments of D_i = -A_ii
  double sigma_D = 0.0;
  double connectivity = 0.0;
  double mu_X = 0.0;            // mean / std of the non-zero off-diagonal entries
  double sigma_X = 0.0;
};

inline MatrixStats matrix_stats(const InteractionMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  if (n < 2) throw InvalidSpec("matrix_stats needs S >= 2");
  const Matrix& w = a.weights();
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);

  double sum = 0.0, sum_sq = 0.0, sum_cross = 0.0;
  double nz = 0.0, nz_sum = 0.0, nz_sq = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double v = w(i, j);
      sum += v;
      sum_sq += v * v;
      sum_cross += v * w(j, i);
      if (v != 0.0) {
        nz += 1.0;
        nz_sum += v;
        nz_sq += v * v;
      }
    }
  }

  MatrixStats s;
  s.size = a.size();
  s.mu_A = sum / pairs;
  const double mean_sq = sum_sq / pairs;
  double var = mean_sq - s.mu_A * s.mu_A;
  if (var <= 1e-12 * mean_sq) var = 0.0;
  s.sigma_A = std::sqrt(var);
  if (var > 0.0) {
    const double rho = (sum_cross / pairs - s.mu_A * s.mu_A) / var;
    s.rho_A = std::clamp(rho, -1.0, 1.0);
  }

  const Vector d = -w.diagonal();
  s.mu_D = d.mean();
  const double var_d = (d.array() - s.mu_D).square().mean();
  s.sigma_D = std::sqrt(std::max(0.0, var_d));

  s.connectivity = nz / pairs;
  if (nz > 0.0) {
    s.mu_X = nz_sum / nz;
    s.sigma_X = std::sqrt(std::max(0.0, nz_sq / nz - s.mu_X * s.mu_X));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Structured-text matrix files: {"format", "rows", "cols", "directed", "values"}
// with values stored row-major.

inline nlohmann::json to_json(const InteractionMatrix& a) {
  nlohmann::json values = nlohmann::json::array();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) values.push_back(a(i, j));
  return {{"format", "netcollapse-matrix"},
          {"rows", a.size()},
          {"cols", a.size()},
          {"directed", a.directed()},
          {"values", std::move(values)}};
}

inline InteractionMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto& values = j.at("values");
    if (rows != cols || values.size() != rows * cols)
      throw MalformedFile("matrix file: dimensions do not match values");
    Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t k = 0; k < values.size(); ++k)
      w(static_cast<Eigen::Index>(k / cols), static_cast<Eigen::Index>(k % cols)) =
          values[k].get<double>();
    return InteractionMatrix(std::move(w), j.value("directed", true));
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("matrix file: ") + e.what());
  }
}

inline void save_matrix(const InteractionMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(a).dump(1) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

inline InteractionMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(path.string() + ": " + e.what());
  }
  return matrix_from_json(j);
}

}  // namespace netcollapse
