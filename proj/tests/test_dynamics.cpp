#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "pgflow/attraction_domain.hpp"
#include "pgflow/dynamics.hpp"
#include "pgflow/essential.hpp"
#include "pgflow/solver.hpp"
#include "support/generators.hpp"
#include "support/properties.hpp"

using pgflow::FlowConfig;
using pgflow::FlowField;
using pgflow::Matrix;
using pgflow::Vector;

namespace {

FlowConfig exact_config() {
  FlowConfig cfg;
  cfg.projector = pgflow::RecursiveMethod{pgflow::DeltaFn::exact()};
  return cfg;
}

double min_eigenvalue(const Matrix& Q) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (Q + Q.transpose()));
  return eig.eigenvalues().minCoeff();
}

}  // namespace

TEST(FeasibleField, SingularPointFallsBackToPlainGradient) {
  const FlowField field = pgflow::feasible_field(pgflow::attraction::example1_problem(),
                                                 exact_config());
  const auto e = field.evaluate(Vector{{-1, -1}});
  EXPECT_EQ(e.f, Matrix::Identity(2, 2));
  EXPECT_EQ(e.xdot, (Vector{{2, 2}}));
}

TEST(FeasibleField, StationaryObjectiveGivesZeroRate) {
  const FlowField field = pgflow::feasible_field(pgflow::attraction::example1_problem(),
                                                 exact_config());
  EXPECT_EQ(field(Vector::Zero(2)), Vector::Zero(2));
}

TEST(FeasibleField, RejectsModifiedConfig) {
  FlowConfig cfg = exact_config();
  cfg.mode = pgflow::ModifiedMode{1.0, false};
  EXPECT_THROW(pgflow::feasible_field(pgflow::attraction::example1_problem(), cfg),
               std::invalid_argument);
  EXPECT_THROW(pgflow::modified_field(pgflow::attraction::example1_problem(), exact_config()),
               std::invalid_argument);
}

TEST(FeasibleField, TangentAtRandomRegularPoints) {
  const auto res = testsupport::check_tangency_and_descent(41, 100);
  EXPECT_TRUE(res.passed) << res.detail;
}

TEST(ModifiedField, EqualsFeasibleFieldOnConstraintSurface) {
  const auto p = pgflow::attraction::example1_problem();
  FlowConfig feas = pgflow::attraction::example1_config();
  feas.mode = pgflow::FeasibleMode{};
  const FlowField f1(p, feas);
  const FlowField f2(p, pgflow::attraction::example1_config());
  for (const Vector& x : {Vector{{-3, 1}}, Vector{{2, -4}}, Vector{{0, -2}}}) {
    ASSERT_EQ(p.c(x)(0), 0.0);
    EXPECT_EQ(f1(x), f2(x));
  }
}

TEST(ModifiedField, RestorationDerivativeIsNonPositive) {
  testsupport::Gen g(42);
  for (int k = 0; k < 100; ++k) {
    const int n = g.integer(2, 6);
    const int m = g.integer(1, n - 1);
    const auto p = testsupport::random_smooth_problem(g, n, m);
    FlowConfig cfg = exact_config();
    cfg.mode = pgflow::ModifiedMode{g.uniform(0.1, 5.0), false};
    const auto e = pgflow::modified_field(p, cfg).evaluate(g.vector(n));
    // d/dt cᵀc = 2cᵀ∇cᵀẋ.
    const double dvc = 2.0 * e.c.dot(e.jac_c.transpose() * e.xdot);
    const double slack = 1e-8 * (1.0 + e.xdot.norm()) * 2.0 * e.c.norm();
    EXPECT_LE(dvc, slack) << "draw " << k;
  }
}

TEST(ModifiedField, InfeasibleStartRestoresConstraint) {
  const auto p = pgflow::attraction::example1_problem();
  const auto run = pgflow::run_flow(p, pgflow::attraction::example1_config(), Vector{{1, -4}});
  const auto& s = run.trajectory.samples;
  ASSERT_GT(s.size(), 10u);
  EXPECT_GT(s.front().metrics.c_norm, 1.0);
  EXPECT_LT(s.back().metrics.c_norm, 1e-3);
  // v_c is decreasing at the start.
  const auto e = pgflow::modified_field(p, pgflow::attraction::example1_config())
                     .evaluate(Vector{{1, -4}});
  EXPECT_LT(e.c.dot(e.jac_c.transpose() * e.xdot), 0.0);
}

TEST(ModifiedField, PureRestorationReachesNullSpace) {
  testsupport::Gen g(43);
  const Matrix A = g.matrix(2, 4);
  const auto p = pgflow::linear_constrained(
      A, Vector::Zero(2), [](const Vector&) { return 0.0; },
      [](const Vector& x) -> Vector { return Vector::Zero(x.size()); });
  FlowConfig cfg = exact_config();
  cfg.mode = pgflow::ModifiedMode{1.0, false};
  const Vector x0 = g.vector(4);
  const auto run = pgflow::run_flow(p, cfg, x0);
  const Vector& x = run.trajectory.final().x;
  EXPECT_LT((A * x).norm(), 1e-5);
  // Least-squares gradient flow moves only in range(Aᵀ).
  const Matrix Z = pgflow::null_space_basis(A);
  EXPECT_LT((Z.transpose() * (x - x0)).norm(), 1e-8);
}

TEST(GainMatrix, IdentityAndScalar) {
  const Matrix f = Matrix::Identity(3, 3);
  const Vector g = Vector::Ones(3), c = Vector::Zero(0);
  const Matrix J = Matrix::Zero(3, 0);
  EXPECT_EQ(pgflow::gain_matrix(pgflow::IdentityGain{}, {f, g, J, c}), Matrix::Identity(3, 3));
  EXPECT_EQ(pgflow::gain_matrix(pgflow::ScalarGain{2.5}, {f, g, J, c}),
            Matrix(2.5 * Matrix::Identity(3, 3)));
}

TEST(GainMatrix, AdaptiveAtFeasibleStart) {
  const auto p = pgflow::attraction::example1_problem();
  const Vector x{{-3, 1}};
  const Vector g = p.objective_gradient(x), c = p.c(x);
  const Matrix J = p.jac(x);
  const Matrix f = pgflow::project_recursive(J, pgflow::DeltaFn::smoothed(10)).matrix;
  const Vector w = J * c - f * f.transpose() * g;
  const Matrix Q = pgflow::gain_matrix(pgflow::AdaptiveGain{20.0, 1e-9}, {f, g, J, c});
  EXPECT_NEAR(Q(0, 0), 20.0 / w.norm(), 1e-12);
  EXPECT_EQ(Q(0, 1), 0.0);
  // Saturation near the solution.
  const Matrix Qs = pgflow::gain_matrix(pgflow::AdaptiveGain{20.0, 1e3}, {f, g, J, c});
  EXPECT_DOUBLE_EQ(Qs(0, 0), 20.0 / 1e3);
}

TEST(GainMatrix, ConditionerBoundedBelowByMuEps) {
  namespace es = pgflow::essential;
  const auto d = es::example2_data();
  const es::EssentialModel model(
      es::build_A(es::generate_correspondences(d.points, d.T_true, d.R_true)));
  testsupport::Gen g(44);
  for (int k = 0; k < 10; ++k) {
    const Vector x = es::pack({Eigen::Vector3d(g.vector(3)).normalized(), g.rotation()});
    const Matrix f = es::EssentialModel::tangent(x);
    const Matrix W = model.reduced_curvature(x);
    const Matrix Q = pgflow::gain_matrix(pgflow::PinvConditionerGain{20.0, 0.01, 1},
                                         {f, model.gradient(x), Matrix::Zero(12, 0),
                                          Vector::Zero(0), &W});
    ASSERT_EQ(Q.rows(), 6);
    EXPECT_LT((Q - Q.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(min_eigenvalue(Q), 20.0 * 0.01 * (1.0 - 1e-12));
    const Matrix expected = 20.0 * (pgflow::pinv(W) + 0.01 * Matrix::Identity(6, 6));
    EXPECT_LT((Q - expected).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + expected.norm()));
  }
}

TEST(GainMatrix, ConditionerIgnoresNegativeCurvature) {
  Matrix W(2, 2);
  W << 2, 0, 0, -3;
  const Matrix f = Matrix::Identity(2, 2);
  const Vector g = Vector::Ones(2);
  const Matrix Q = pgflow::gain_matrix(pgflow::PinvConditionerGain{1.0, 0.1, 1},
                                       {f, g, Matrix::Zero(2, 0), Vector::Zero(0), &W});
  EXPECT_NEAR(Q(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(Q(1, 1), 0.1, 1e-15);
  EXPECT_THROW(pgflow::gain_matrix(pgflow::PinvConditionerGain{}, {f, g, Matrix::Zero(2, 0),
                                                                  Vector::Zero(0)}),
               std::invalid_argument);
}

TEST(FlowConfig, ValidatesParameters) {
  const auto p = pgflow::attraction::example1_problem();
  FlowConfig cfg;
  cfg.mode = pgflow::ModifiedMode{0.0, false};
  EXPECT_THROW(FlowField(p, cfg), std::invalid_argument);
  cfg.mode = pgflow::FeasibleMode{};
  cfg.gain = pgflow::ScalarGain{-1.0};
  EXPECT_THROW(FlowField(p, cfg), std::invalid_argument);
  cfg.gain = pgflow::AdaptiveGain{20.0, 0.0};
  EXPECT_THROW(FlowField(p, cfg), std::invalid_argument);
  cfg.gain = pgflow::PinvConditionerGain{20.0, 0.0, 1};
  EXPECT_THROW(FlowField(p, cfg), std::invalid_argument);
  cfg.gain = pgflow::PinvConditionerGain{};
  cfg.mode = pgflow::ModifiedMode{1.0, true};
  EXPECT_THROW(FlowField(p, cfg), std::invalid_argument);
}

TEST(FlowField, ConditionerCacheFollowsRefreshInterval) {
  const auto p = pgflow::attraction::example1_problem();
  FlowConfig cfg = exact_config();
  cfg.gain = pgflow::PinvConditionerGain{1.0, 0.1, 2};
  FlowField field(p, cfg);
  const Vector x0{{-3, 1}}, x1{{0.5, -0.775}};
  field.reset(x0);
  const Matrix q0 = field.evaluate(x1).Q;
  field.on_accepted_step(x1);  // step 1: no refresh
  EXPECT_EQ(field.evaluate(x1).Q, q0);
  field.on_accepted_step(x1);  // step 2: refresh at x1
  const Matrix q2 = field.evaluate(x0).Q;
  EXPECT_GT((q2 - q0).norm(), 1e-6);

  cfg.gain = pgflow::PinvConditionerGain{1.0, 0.1, 0};
  FlowField live(p, cfg);
  live.reset(x0);
  EXPECT_EQ(live.evaluate(x1).Q, q2);
}

TEST(FlowField, RejectsWrongDimension) {
  const FlowField field(pgflow::attraction::example1_problem(), exact_config());
  EXPECT_THROW(field(Vector::Zero(3)), pgflow::DimensionMismatch);
}
