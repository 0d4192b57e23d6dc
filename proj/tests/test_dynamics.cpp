#include <gtest/gtest.h>

#include "netcollapse/dynamics.hpp"
#include "netcollapse/generators.hpp"

using namespace netcollapse;

namespace {

InteractionMatrix scalar(double v) { return InteractionMatrix(Matrix::Constant(1, 1, v)); }

// x_i' = F_i(x_i) + sum_j A_ij G_i(x_i, x_j), evaluated term by term
Vector step_oracle(const InteractionMatrix& a, const DynamicsModel& m, const Vector& x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double v = m.self_value(i, x(static_cast<Eigen::Index>(i)));
    for (std::size_t j = 0; j < a.size(); ++j)
      v += a(i, j) * m.coupling_value(i, x(static_cast<Eigen::Index>(i)),
                                      x(static_cast<Eigen::Index>(j)));
    out(static_cast<Eigen::Index>(i)) = v;
  }
  return out;
}

Vector uniform_vector(std::size_t n, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(DynamicsModel, GlvTables) {
  const auto m = make_glv(Vector::Constant(3, 1.0));
  EXPECT_EQ(m.self_order(), 2);
  EXPECT_EQ(m.coupling_order(), 3);
  EXPECT_EQ(m.self_coeffs().col(0), Vector::Zero(3));
  EXPECT_EQ(m.self_coeffs().col(1), Vector::Constant(3, 2.0));
  EXPECT_EQ(m.collapsed_coupling().col(0), Vector::Zero(3));
  EXPECT_EQ(m.collapsed_coupling().col(1), Vector::Zero(3));
  EXPECT_EQ(m.collapsed_coupling().col(2), Vector::Ones(3));
  EXPECT_EQ(m.default_clamp(), ClampMode::nonnegative);
}

TEST(DynamicsModel, GlvZeroGrowthIsIdentity) {
  const auto m = make_glv(Vector::Zero(2));
  EXPECT_DOUBLE_EQ(m.self_value(0, 0.37), 0.37);
}

TEST(DynamicsModel, SisTables) {
  const auto m = make_sis(Vector::Constant(2, 1.0));
  EXPECT_EQ(m.self_coeffs().col(1), Vector::Zero(2));
  EXPECT_DOUBLE_EQ(m.self_value(0, 0.8), 0.0);
  EXPECT_EQ(m.collapsed_coupling().col(1), Vector::Ones(2));
  EXPECT_EQ(m.collapsed_coupling().col(2), -Vector::Ones(2));
  EXPECT_EQ(m.default_clamp(), ClampMode::unit_interval);
}

TEST(DynamicsModel, PropertyCollapsedTableSumsMonomials) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(1, 4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<CouplingTerm> terms;
    Matrix expected = Matrix::Zero(3, 7);
    int n = 1;
    for (int k = 0; k < 5; ++k) {
      const int p = deg(rng), q = deg(rng);
      Vector c(3);
      for (auto& v : c) v = u(rng);
      terms.push_back({p, q, c});
      expected.col(p + q - 2) += c;
      n = std::max(n, p + q - 1);
    }
    const DynamicsModel m(Matrix::Ones(3, 2), terms);
    EXPECT_EQ(m.coupling_order(), n);
    EXPECT_TRUE(m.collapsed_coupling().isApprox(expected.leftCols(n), 1e-15));
  }
}

TEST(DynamicsModel, Validation) {
  EXPECT_THROW(DynamicsModel(Matrix::Zero(2, 0), {}), InvalidSpec);
  EXPECT_THROW(DynamicsModel(Matrix::Zero(2, 1), {{0, 1, Vector::Zero(2)}}), InvalidSpec);
  EXPECT_THROW(DynamicsModel(Matrix::Zero(2, 1), {{1, 1, Vector::Zero(3)}}), InvalidSpec);
  Matrix bad = Matrix::Zero(2, 1);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(DynamicsModel(bad, {}), InvalidSpec);
}

TEST(StepFull, SingleNodeGlvFixedPoint) {
  const auto x = step_full(scalar(-1.0), make_glv(Vector::Ones(1)), Vector::Ones(1));
  EXPECT_DOUBLE_EQ(x(0), 1.0);
}

TEST(StepFull, ZeroDynamics) {
  const DynamicsModel zero(Matrix::Zero(4, 3), {{2, 3, Vector::Zero(4)}});
  const InteractionMatrix a(Matrix::Random(4, 4));
  EXPECT_EQ(step_full(a, zero, Vector::Constant(4, 0.7)), Vector::Zero(4));
}

TEST(StepFull, PropertySisZeroIsAbsorbing) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = scaled(generate_er(30, 0.2, seed), 0.3);
    const auto m = make_sis(uniform_vector(30, 0.0, 1.0, seed));
    EXPECT_EQ(step_full(a, m, Vector::Zero(30)), Vector::Zero(30));
  }
}

TEST(StepFull, PropertyMatchesTermwiseOracle) {
  Rng rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 5;
    Matrix self(n, 4);
    for (auto& v : self.reshaped()) v = u(rng);
    std::vector<CouplingTerm> terms;
    for (int p = 1; p <= 3; ++p)
      for (int q = 1; q <= 2; ++q) terms.push_back({p, q, uniform_vector(n, -1, 1, seed * 10 + p * 3 + q)});
    const DynamicsModel m(self, terms);
    const InteractionMatrix a(Matrix::NullaryExpr(n, n, [&] { return u(rng); }));
    const Vector x = uniform_vector(n, -1.0, 1.0, seed + 100);
    EXPECT_TRUE(step_full(a, m, x, ClampMode::none).isApprox(step_oracle(a, m, x), 1e-12));
  }
}

TEST(StepFull, ClampModes) {
  const InteractionMatrix a(Matrix::Zero(2, 2));
  const DynamicsModel m((Matrix(2, 2) << -0.5, 0.0, 1.5, 0.0).finished(), {});
  EXPECT_EQ(step_full(a, m, Vector::Zero(2), ClampMode::none), Vector(Vector{{-0.5, 1.5}}));
  EXPECT_EQ(step_full(a, m, Vector::Zero(2), ClampMode::nonnegative), Vector(Vector{{0.0, 1.5}}));
  EXPECT_EQ(step_full(a, m, Vector::Zero(2), ClampMode::unit_interval), Vector(Vector{{0.0, 1.0}}));
}

TEST(StepFull, NonFiniteStateThrows) {
  const DynamicsModel m((Matrix(1, 3) << 0.0, 0.0, 1e300).finished(), {});
  EXPECT_THROW(step_full(scalar(0.0), m, Vector::Constant(1, 1e10)), NonFiniteState);
  EXPECT_THROW(step_full(scalar(0.0), m, Vector::Ones(2)), InvalidSpec);
}

TEST(Simulate, SingleNodeGlvConverges) {
  const auto rec = simulate(scalar(-1.0), make_glv(Vector::Ones(1)), Vector::Constant(1, 0.05));
  EXPECT_EQ(rec.status, Status::converged);
  EXPECT_NEAR(rec.x_star(0), 1.0, 1e-9);
  EXPECT_NEAR(rec.x_eff, 1.0, 1e-9);
}

TEST(Simulate, ZeroStaysZero) {
  const auto rec = simulate(scalar(-1.0), make_glv(Vector::Ones(1)), Vector::Zero(1));
  EXPECT_EQ(rec.status, Status::converged);
  EXPECT_EQ(rec.x_star(0), 0.0);
  EXPECT_EQ(rec.steps, 0u);
}

TEST(Simulate, PeriodDoublingBeyondThree) {
  // x' = 3.2 x - x^2 has multiplier -1.2 at its non-zero fixed point 2.2
  SimulationSettings s;
  s.max_steps = 5000;
  const auto rec = simulate(scalar(-1.0), make_glv(Vector::Constant(1, 2.2)), Vector::Constant(1, 0.3), s);
  EXPECT_NE(rec.status, Status::converged);
  EXPECT_EQ(rec.status, Status::max_steps);
  EXPECT_TRUE(rec.period2);
}

TEST(Simulate, DivergenceDetected) {
  SimulationSettings s;
  s.clamp = ClampMode::none;
  const auto rec = simulate(scalar(1.0), make_glv(Vector::Ones(1)), Vector::Constant(1, 0.5), s);
  EXPECT_EQ(rec.status, Status::diverged);
}

TEST(Simulate, SettingsValidated) {
  SimulationSettings s;
  s.max_steps = 0;
  EXPECT_THROW(simulate(scalar(-1.0), make_glv(Vector::Ones(1)), Vector::Ones(1), s), InvalidSpec);
  s = {};
  s.convergence_tol = 0.0;
  EXPECT_THROW(s.validate(), InvalidSpec);
  s = {};
  s.divergence_bound = 1.0;
  EXPECT_THROW(s.validate(), InvalidSpec);
}

TEST(Simulate, PropertyConvergenceIsSelfCertifying) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    RandomMatrixSpec spec;
    spec.size = 20;
    spec.sigma_D = 0.1;  // keeps every A_ii < 0
    spec.seed = seed;
    const auto a = generate_random_matrix(spec);
    const auto m = make_glv(uniform_vector(20, 0.5, 1.5, seed));
    const auto rec = simulate(a, m, uniform_vector(20, 0.0, 0.1, seed + 1));
    ASSERT_EQ(rec.status, Status::converged);
    EXPECT_LT((step_full(a, m, rec.x_star) - rec.x_star).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Simulate, PropertySisStaysInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = scaled(generate_ba(60, 2, seed), 0.8);
    const auto m = make_sis(uniform_vector(60, 0.0, 1.0, seed));
    Vector x = uniform_vector(60, 0.0, 1.0, seed + 7);
    for (int t = 0; t < 200; ++t) {
      x = step_full(a, m, x);
      ASSERT_GE(x.minCoeff(), 0.0);
      ASSERT_LE(x.maxCoeff(), 1.0);
    }
  }
}

TEST(Simulate, Deterministic) {
  RandomMatrixSpec spec;
  spec.size = 15;
  spec.seed = 77;
  const auto a = generate_random_matrix(spec);
  const auto m = make_glv(Vector::Ones(15));
  const Vector x0 = uniform_vector(15, 0.0, 0.1, 3);
  const auto r1 = simulate(a, m, x0), r2 = simulate(a, m, x0);
  EXPECT_EQ(r1.x_star, r2.x_star);
  EXPECT_EQ(r1.steps, r2.steps);
  EXPECT_EQ(r1.x_eff, r2.x_eff);
}

TEST(GlvFixedPoint, Examples) {
  EXPECT_DOUBLE_EQ(glv_analytic_fixed_point(scalar(-1.0), Vector::Ones(1))(0), 1.0);
  const auto x = glv_analytic_fixed_point(InteractionMatrix(-Matrix::Identity(2, 2)), Vector{{2.0, 3.0}});
  EXPECT_DOUBLE_EQ(x(0), 2.0);
  EXPECT_DOUBLE_EQ(x(1), 3.0);
  EXPECT_THROW(glv_analytic_fixed_point(InteractionMatrix(Matrix::Ones(2, 2)), Vector::Ones(2)),
               SingularMatrix);
}

TEST(GlvFixedPoint, PropertyResidual) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomMatrixSpec spec;
    spec.size = 20;
    spec.seed = seed;
    const auto a = generate_random_matrix(spec);
    const Vector alpha = uniform_vector(20, -1.0, 1.0, seed);
    const Vector x = glv_analytic_fixed_point(a, alpha);
    const Vector next = step_full(a, make_glv(alpha), x, ClampMode::none);
    EXPECT_LT((next - x).cwiseAbs().maxCoeff(), 1e-10);
  }
}
