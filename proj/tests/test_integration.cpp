#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "maxent/integration.hpp"
#include "maxent/parallel.hpp"

using namespace maxent;

TEST(CompositeRule, MidpointTwoCells) {
  const QuadratureRule r = composite_rule(SupportInterval(0, 1), 2, RuleKind::midpoint);
  ASSERT_EQ(r.size(), 2);
  EXPECT_DOUBLE_EQ(r.nodes(0), 0.25);
  EXPECT_DOUBLE_EQ(r.nodes(1), 0.75);
  EXPECT_DOUBLE_EQ(r.weights(0), 0.5);
  EXPECT_DOUBLE_EQ(r.weights(1), 0.5);
}

TEST(CompositeRule, ConstantsIntegrateExactly) {
  for (RuleKind k : {RuleKind::midpoint, RuleKind::simpson})
    for (Index n : {3, 10, 101}) {
      const QuadratureRule r = composite_rule(SupportInterval(0, 1), n, k);
      EXPECT_NEAR(r.integrate(Vector::Ones(r.size())), 1.0, 1e-14);
    }
}

TEST(CompositeRule, SimpsonExactForCubics) {
  const QuadratureRule r = composite_rule(SupportInterval(0, 1), 3, RuleKind::simpson);
  EXPECT_NEAR(r.integrate(r.nodes.array().square().matrix()), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.integrate(r.nodes.array().cube().matrix()), 0.25, 1e-15);
}

TEST(CompositeRule, SimpsonRoundsToOddNodeCount) {
  const QuadratureRule r = composite_rule(SupportInterval(-1, 2), 4, RuleKind::simpson);
  EXPECT_EQ(r.size() % 2, 1);
  EXPECT_NEAR(r.weights.sum(), 3.0, 1e-14);
}

TEST(CompositeRule, RejectsDegenerateInput) {
  EXPECT_THROW(composite_rule(SupportInterval(0, 1), 0, RuleKind::midpoint), InvalidArgument);
}

TEST(VanDerCorput, KnownValues) {
  const Vector v = vdc_sequence(3, 2);
  EXPECT_DOUBLE_EQ(v(0), 0.5);
  EXPECT_DOUBLE_EQ(v(1), 0.25);
  EXPECT_DOUBLE_EQ(v(2), 0.75);
  EXPECT_DOUBLE_EQ(vdc_sequence(1, 3)(0), 1.0 / 3.0);
  EXPECT_THROW(vdc_sequence(4, 4), InvalidArgument);
}

TEST(VanDerCorput, QmcMeanOfIdentity) {
  const QuadratureRule r = qmc_rule(SupportInterval(0, 1), 4096, 2);
  EXPECT_NEAR(r.integrate(r.nodes), 0.5, 1e-3);
  EXPECT_TRUE((r.nodes.array() >= 0.0).all() && (r.nodes.array() < 1.0).all());
}

TEST(Log2Integral, Basics) {
  QuadratureRule r;
  r.nodes = Vector::LinSpaced(2, 0, 1);
  r.weights = Vector::Constant(2, 0.5);
  EXPECT_DOUBLE_EQ(log2_integral(Vector::Zero(2), r), 0.0);
  EXPECT_DOUBLE_EQ(log2_integral(Vector::Constant(2, 1000.0), r), 1000.0);
}

TEST(Log2Integral, AgreesWithNaiveSumAtModerateMagnitude) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  const QuadratureRule r = composite_rule(SupportInterval(0, 1), 257, RuleKind::simpson);
  Vector g(r.size());
  for (Index j = 0; j < g.size(); ++j) g(j) = u(rng);
  double naive = 0.0;
  for (Index j = 0; j < g.size(); ++j) naive += r.weights(j) * std::exp2(g(j));
  EXPECT_NEAR(log2_integral(g, r), std::log2(naive), 1e-12);
}

TEST(PairwiseSum, MatchesLongDoubleReference) {
  Vector v(100001);
  long double ref = 0.0L;
  for (Index i = 0; i < v.size(); ++i) {
    v(i) = 1.0 / static_cast<double>(i + 1);
    ref += static_cast<long double>(v(i));
  }
  EXPECT_NEAR(pairwise_sum(v), static_cast<double>(ref), 1e-13);
}

TEST(Parallel, ResultIndependentOfThreadCount) {
  setenv("MAXENT_THREADS", "4", 1);
  EXPECT_EQ(thread_budget(), 4);
  Vector out(20000);
  parallel_for(out.size(), [&](long i) { out(i) = std::sin(static_cast<double>(i)); }, 16);
  unsetenv("MAXENT_THREADS");
  for (Index i = 0; i < out.size(); ++i) ASSERT_EQ(out(i), std::sin(static_cast<double>(i)));
  EXPECT_EQ(thread_budget(), 0);
}
