#include <gtest/gtest.h>

#include "pgflow/attraction_domain.hpp"
#include "pgflow/solver.hpp"
#include "support/generators.hpp"

namespace ad = pgflow::attraction;
using pgflow::Matrix;
using pgflow::Termination;
using pgflow::Vector;

TEST(AttractionProblem, ReferenceFacts) {
  const auto p = ad::example1_problem();
  EXPECT_EQ(p.jac(Vector{{-1, -1}}), Matrix::Zero(2, 1));
  EXPECT_EQ(p.c(Vector{{-3, 1}})(0), 0.0);
  EXPECT_NEAR(p.objective(ad::reference_solution()), ad::kReferenceValue, 5e-4);
}

TEST(AttractionProblem, LagrangianHessianMatchesFiniteDifferences) {
  const auto p = ad::example1_problem();
  testsupport::Gen g(61);
  for (int k = 0; k < 10; ++k) {
    const Vector x = g.vector(2, 2.0);
    const Vector lambda = g.vector(1);
    Matrix fd(2, 2);
    for (int j = 0; j < 2; ++j) {
      Vector xp = x, xm = x;
      xp(j) += 1e-6;
      xm(j) -= 1e-6;
      fd.col(j) = ((p.objective_gradient(xp) - p.jac(xp) * lambda) -
                   (p.objective_gradient(xm) - p.jac(xm) * lambda)) / 2e-6;
    }
    EXPECT_LT((fd - p.lagrangian_hessian(x, lambda)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

class TableOneStarts : public ::testing::TestWithParam<Vector> {};

TEST_P(TableOneStarts, ReachesReportedMinimum) {
  const auto run = pgflow::run_flow(ad::example1_problem(), ad::example1_config(), GetParam());
  const auto& last = run.trajectory.final();
  EXPECT_EQ(run.trajectory.termination, Termination::stalled);
  EXPECT_NEAR(last.metrics.v, ad::kReferenceValue, 1e-2);
  EXPECT_LE((last.x - ad::reference_solution()).norm(), 2e-2);
  EXPECT_LE(last.metrics.c_norm, 1e-3);
  EXPECT_LE(run.wall_seconds, 5.0);
}

INSTANTIATE_TEST_SUITE_P(AttractionDomain, TableOneStarts,
                         ::testing::Values(Vector{{-3, 1}}, Vector{{2, -4}}, Vector{{1, -4}}));

TEST(AttractionDomain, RecursiveProjectorAvoidsTheSingularPoint) {
  const auto p = ad::example1_problem();
  pgflow::FlowConfig naive = ad::example1_config();
  naive.projector = pgflow::NaiveMethod{};
  const auto failed = pgflow::run_flow(p, naive, Vector{{-3, 1}});
  const Vector singular{{-1, -1}};
  const bool stopped_there =
      (failed.trajectory.termination == Termination::field_error &&
       failed.trajectory.failure.has_value() &&
       (failed.trajectory.failure->x - singular).norm() <= 5e-2) ||
      (failed.trajectory.termination == Termination::stalled &&
       (failed.trajectory.final().x - singular).norm() <= 5e-2);
  EXPECT_TRUE(stopped_there);

  const auto ok = pgflow::run_flow(p, ad::example1_config(), Vector{{-3, 1}});
  EXPECT_EQ(ok.trajectory.termination, Termination::stalled);
  EXPECT_LE((ok.trajectory.final().x - ad::reference_solution()).norm(), 2e-2);
}

TEST(AttractionDomain, SmallerGammaStillConverges) {
  for (double gamma : {10.0, 30.0}) {
    const auto run = pgflow::run_flow(ad::example1_problem(), ad::example1_config(gamma),
                                      Vector{{2, -4}});
    EXPECT_EQ(run.trajectory.termination, Termination::stalled) << "gamma " << gamma;
    EXPECT_LE((run.trajectory.final().x - ad::reference_solution()).norm(), 2e-2)
        << "gamma " << gamma;
  }
}
