#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "pgflow/attraction_domain.hpp"
#include "pgflow/expr.hpp"
#include "support/generators.hpp"

namespace expr = pgflow::expr;
using pgflow::Vector;

namespace {

const char* const kSigma = "(x1+x2+2)*((x2+1) - 0.1*(x1+1)^2)";

std::size_t offset_of(const std::string& src, pgflow::Index n) {
  try {
    expr::parse(src, n);
  } catch (const pgflow::SyntaxError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "'" << src << "' parsed";
  return std::string::npos;
}

}  // namespace

TEST(ExprParse, ObjectiveOfAttractionProblem) {
  const auto e = expr::parse("x1^2 + x2^2", 2);
  EXPECT_DOUBLE_EQ(expr::eval(e, Vector{{-3, 1}}), 10.0);
}

TEST(ExprParse, ConstraintMatchesBuiltin) {
  const auto e = expr::parse(kSigma, 2);
  const auto p = pgflow::attraction::example1_problem();
  testsupport::Gen g(31);
  for (int k = 0; k < 20; ++k) {
    const Vector x = g.vector(2, 2.0);
    EXPECT_NEAR(expr::eval(e, x), p.c(x)(0), 1e-12);
    EXPECT_LT((expr::gradient(e, x) - p.jac(x).col(0)).norm(), 1e-12);
  }
  EXPECT_LT(std::abs(expr::eval(e, pgflow::attraction::reference_solution())), 1e-3);
}

TEST(ExprParse, SyntaxErrorOffsets) {
  EXPECT_EQ(offset_of("x3 + ", 3), 5u);
  EXPECT_EQ(offset_of("x1 * (x2 + 1", 2), 12u);
  EXPECT_EQ(offset_of("x1 $ 2", 1), 3u);
  EXPECT_EQ(offset_of("", 1), 0u);
  EXPECT_EQ(offset_of("1.2.3", 1), 3u);
}

TEST(ExprParse, UnknownNamesReportTheirOffset) {
  try {
    expr::parse("x1 + x3", 2);
    FAIL() << "x3 accepted with two variables";
  } catch (const pgflow::UnknownVariable& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
  try {
    expr::parse("2 * tan(x1)", 1);
    FAIL() << "tan accepted";
  } catch (const pgflow::UnknownFunction& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_THROW(expr::parse("x0", 1), pgflow::UnknownVariable);
  EXPECT_THROW(expr::parse("y", 1), pgflow::UnknownVariable);
}

TEST(ExprParse, PrecedenceAndAssociativity) {
  const Vector x{{3}};
  EXPECT_DOUBLE_EQ(expr::eval(expr::parse("-x1^2", 1), x), -9.0);
  EXPECT_DOUBLE_EQ(expr::eval(expr::parse("2^3^2", 1), x), 512.0);
  EXPECT_DOUBLE_EQ(expr::eval(expr::parse("2^-1", 1), x), 0.5);
  EXPECT_DOUBLE_EQ(expr::eval(expr::parse("1 - 2 - 3", 1), x), -4.0);
  EXPECT_DOUBLE_EQ(expr::eval(expr::parse("12 / 2 / 3", 1), x), 2.0);
  EXPECT_DOUBLE_EQ(expr::eval(expr::parse("1 + 2 * x1", 1), x), 7.0);
  EXPECT_DOUBLE_EQ(expr::eval(expr::parse("1.5e1 + abs(-x1)", 1), x), 18.0);
}

TEST(ExprEval, NonFiniteResultsAreErrors) {
  EXPECT_THROW(expr::eval(expr::parse("1/x1", 1), Vector{{0}}), pgflow::NonFiniteEvaluation);
  EXPECT_THROW(expr::eval(expr::parse("sqrt(x1)", 1), Vector{{-1}}), pgflow::NonFiniteEvaluation);
  EXPECT_THROW(expr::eval(expr::parse("x1", 1), Vector{{0, 1}}), pgflow::DimensionMismatch);
}

TEST(ExprGradient, HandDerivatives) {
  EXPECT_EQ(expr::gradient(expr::parse("x1*x2", 2), Vector{{2, 3}}), (Vector{{3, 2}}));
  EXPECT_EQ(expr::gradient(expr::parse(kSigma, 2), Vector{{-1, -1}}), Vector::Zero(2));
  EXPECT_EQ(expr::gradient(expr::parse("abs(x1)", 1), Vector{{0}}), Vector::Zero(1));
  const Vector g = expr::gradient(expr::parse("sin(x1) * exp(x2)", 2), Vector{{0.3, -0.4}});
  EXPECT_NEAR(g(0), std::cos(0.3) * std::exp(-0.4), 1e-15);
  EXPECT_NEAR(g(1), std::sin(0.3) * std::exp(-0.4), 1e-15);
}

TEST(ExprGradient, ConstraintMatchesFiniteDifferences) {
  const auto e = expr::parse(kSigma, 2);
  testsupport::Gen g(32);
  for (int k = 0; k < 20; ++k) {
    const Vector x = g.vector(2, 2.0);
    const Vector grad = expr::gradient(e, x);
    for (int i = 0; i < 2; ++i) {
      Vector xp = x, xm = x;
      xp(i) += 1e-6;
      xm(i) -= 1e-6;
      EXPECT_NEAR(grad(i), (expr::eval(e, xp) - expr::eval(e, xm)) / 2e-6, 1e-6);
    }
  }
}

TEST(ExprPrint, RoundTripsRandomExpressions) {
  testsupport::Gen g(33);
  for (int k = 0; k < 200; ++k) {
    const int n = g.integer(1, 4);
    const auto e = expr::parse(testsupport::random_expr(g, n, 4), n);
    const std::string text = expr::print(e);
    const auto back = expr::parse(text, n);
    EXPECT_TRUE(expr::structurally_equal(e, back)) << text;
    EXPECT_EQ(expr::print(back), text);
  }
}

TEST(ExprPrint, UsesMinimalParentheses) {
  EXPECT_EQ(expr::print(expr::parse("((x1 + x2)) * x1", 2)), "(x1 + x2) * x1");
  EXPECT_EQ(expr::print(expr::parse("x1 - (x2 - x1)", 2)), "x1 - (x2 - x1)");
  EXPECT_EQ(expr::print(expr::parse("(x1 * x2) * x1", 2)), "x1 * x2 * x1");
  EXPECT_EQ(expr::print(expr::parse("(2^3)^2", 1)), "(2^3)^2");
}

TEST(ExprProblem, AssemblesObjectiveAndConstraints) {
  const auto p = expr::make_problem(2, "x1^2 + x2^2", {kSigma, "x1 - x2"});
  EXPECT_EQ(p.n, 2);
  EXPECT_EQ(p.m, 2);
  const Vector x{{0.5, -0.25}};
  const auto builtin = pgflow::attraction::example1_problem();
  EXPECT_DOUBLE_EQ(p.objective(x), builtin.objective(x));
  EXPECT_NEAR(p.c(x)(0), builtin.c(x)(0), 1e-15);
  EXPECT_DOUBLE_EQ(p.c(x)(1), 0.75);
  EXPECT_EQ(p.jac(x).col(1), (Vector{{1, -1}}));
  EXPECT_LT(pgflow::check_gradients(p, x, 1e-6).max_error(), 1e-8);
}
