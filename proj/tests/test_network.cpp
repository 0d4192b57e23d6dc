#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "netcollapse/generators.hpp"
#include "netcollapse/network.hpp"

using namespace netcollapse;

namespace {

InteractionMatrix cycle3() {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = w(1, 2) = w(2, 0) = 1.0;
  return InteractionMatrix(w);
}

Matrix random_weights(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
  return w;
}

// sum_ijk A_ik A_kj / sum_ij A_ij by explicit loops
double a_eff_triple_sum(const Matrix& a) {
  const auto n = a.rows();
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      den += a(i, j);
      for (Eigen::Index k = 0; k < n; ++k) num += a(i, k) * a(k, j);
    }
  return num / den;
}

}  // namespace

TEST(InteractionMatrix, RejectsNonSquareEmptyAndNonFinite) {
  EXPECT_THROW(InteractionMatrix(Matrix::Zero(2, 3)), InvalidSpec);
  EXPECT_THROW(InteractionMatrix(Matrix::Zero(0, 0)), InvalidSpec);
  Matrix w = Matrix::Zero(2, 2);
  w(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(InteractionMatrix{w}, InvalidSpec);
}

TEST(Degrees, CycleHasUnitDegrees) {
  const auto a = cycle3();
  EXPECT_EQ(out_degrees(a), Vector::Ones(3));
  EXPECT_EQ(in_degrees(a), Vector::Ones(3));
}

TEST(Degrees, ZeroMatrixHasZeroDegrees) {
  EXPECT_EQ(out_degrees(InteractionMatrix::zeros(5)), Vector::Zero(5));
}

TEST(Degrees, AllOnes) {
  const InteractionMatrix a(Matrix::Ones(4, 4));
  EXPECT_EQ(out_degrees(a), Vector::Constant(4, 4.0));
}

TEST(Degrees, TotalsAreConsistent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const InteractionMatrix a(random_weights(7, seed));
    EXPECT_NEAR(out_degrees(a).sum(), a.total_weight(), 1e-12);
    EXPECT_NEAR(in_degrees(a).sum(), a.total_weight(), 1e-12);
  }
}

TEST(MeanField, CycleExample) {
  EXPECT_DOUBLE_EQ(mean_field(cycle3(), Vector{{1.0, 2.0, 3.0}}), 2.0);
}

TEST(MeanField, ZeroWeightThrows) {
  EXPECT_THROW(mean_field(InteractionMatrix::zeros(3), Vector::Ones(3)), ZeroTotalWeight);
  Matrix w(2, 2);
  w << 1.0, -1.0, -1.0, 1.0;  // columns cancel
  EXPECT_THROW(MeanField{InteractionMatrix(w)}, ZeroTotalWeight);
}

TEST(MeanField, PropertyConstantsAndLinearity) {
  Rng rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const InteractionMatrix a(random_weights(6, seed, 0.0, 1.0));
    const MeanField mf(a);
    const double c = u(rng);
    EXPECT_NEAR(mf(Vector::Constant(6, c)), c, 1e-14 * std::max(1.0, std::abs(c)));
    Vector x(6), y(6);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const double s = u(rng), t = u(rng);
    EXPECT_NEAR(mf(s * x + t * y), s * mf(x) + t * mf(y), 1e-12);
  }
}

TEST(AEff, Examples) {
  EXPECT_DOUBLE_EQ(a_eff(cycle3()), 1.0);
  EXPECT_DOUBLE_EQ(a_eff(InteractionMatrix(Matrix::Ones(4, 4))), 4.0);
  const std::size_t s = 10;
  const double off = -0.03, d = 0.8;
  Matrix w = Matrix::Constant(s, s, off);
  w.diagonal().setConstant(-d);
  EXPECT_NEAR(a_eff(InteractionMatrix(w)), (s - 1.0) * off - d, 1e-12);
}

TEST(AEff, PropertyMatchesTripleSum) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix w = random_weights(3 + seed % 9, seed, -0.2, 1.0);
    const double oracle = a_eff_triple_sum(w);
    EXPECT_NEAR(a_eff(InteractionMatrix(w)), oracle, 1e-10 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(MatrixStats, SymmetricHasUnitCorrelation) {
  Matrix w = random_weights(8, 3);
  w = (w + w.transpose()).eval();
  const auto st = matrix_stats(InteractionMatrix(w));
  ASSERT_TRUE(st.rho_A.has_value());
  EXPECT_NEAR(*st.rho_A, 1.0, 1e-12);
}

TEST(MatrixStats, ConstantOffDiagonalHasNoCorrelation) {
  Matrix w = Matrix::Constant(5, 5, 0.3);
  w.diagonal().setConstant(-1.0);
  const auto st = matrix_stats(InteractionMatrix(w));
  EXPECT_NEAR(st.mu_A, 0.3, 1e-15);
  EXPECT_EQ(st.sigma_A, 0.0);
  EXPECT_FALSE(st.rho_A.has_value());
  EXPECT_DOUBLE_EQ(st.mu_D, 1.0);
  EXPECT_DOUBLE_EQ(st.sigma_D, 0.0);
  EXPECT_DOUBLE_EQ(st.connectivity, 1.0);
}

TEST(MatrixStats, ThreeByThreeEstimator) {
  Matrix w(3, 3);
  w << -1.0, 0.1, 0.2, 0.3, -2.0, 0.4, 0.5, 0.6, -3.0;
  const auto st = matrix_stats(InteractionMatrix(w));
  const std::vector<double> off{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  double sq = 0.0;
  for (double v : off) sq += v * v;
  const double mu = 0.35;
  const double var = sq / 6.0 - mu * mu;
  EXPECT_NEAR(st.mu_A, mu, 1e-15);
  EXPECT_NEAR(st.sigma_A, std::sqrt(var), 1e-14);
  // pairs (0.1,0.3) (0.2,0.5) (0.4,0.6)
  const double cross = 2.0 * (0.1 * 0.3 + 0.2 * 0.5 + 0.4 * 0.6) / 6.0;
  EXPECT_NEAR(*st.rho_A, (cross - mu * mu) / var, 1e-12);
  EXPECT_DOUBLE_EQ(st.mu_D, 2.0);
  EXPECT_NEAR(st.sigma_D, std::sqrt(2.0 / 3.0), 1e-14);
}

TEST(MatrixStats, PropertyBounds) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RandomMatrixSpec spec;
    spec.size = 10;
    spec.rho = -1.0 + 2.0 * (seed % 11) / 10.0;
    spec.seed = seed;
    const auto st = matrix_stats(generate_random_matrix(spec));
    EXPECT_GE(st.sigma_A, 0.0);
    EXPECT_GE(st.sigma_D, 0.0);
    ASSERT_TRUE(st.rho_A.has_value());
    EXPECT_LE(std::abs(*st.rho_A), 1.0);
    EXPECT_GE(st.connectivity, 0.0);
    EXPECT_LE(st.connectivity, 1.0);
  }
}

TEST(MatrixStats, RequiresTwoNodes) {
  EXPECT_THROW(matrix_stats(InteractionMatrix(Matrix::Ones(1, 1))), InvalidSpec);
}

TEST(MatrixFile, RoundTrip) {
  const InteractionMatrix a(random_weights(6, 17), false);
  const auto path = std::filesystem::temp_directory_path() / "netcollapse_matrix_rt.json";
  save_matrix(a, path);
  EXPECT_EQ(load_matrix(path), a);
  std::filesystem::remove(path);
}

TEST(MatrixFile, Malformed) {
  EXPECT_THROW(matrix_from_json({{"rows", 2}, {"cols", 2}, {"values", {1, 2, 3}}}), MalformedFile);
  EXPECT_THROW(matrix_from_json({{"rows", 1}}), MalformedFile);
  EXPECT_THROW(load_matrix("/nonexistent/matrix.json"), IoError);
}
