#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "maxent/gibbs.hpp"

using namespace maxent;

namespace {

MomentProblem unit_problem(Index order, double radius = 0.01) {
  Vector y(order);
  for (Index i = 0; i < order; ++i) y(i) = 1.0 / static_cast<double>(i + 2);
  return MomentProblem::with_uniform_radius(SupportInterval(0, 1), y, radius);
}

}  // namespace

TEST(GibbsMeasure, ConstantCostLeavesReference) {
  const MomentProblem p = unit_problem(2);
  const QuadratureRule rule = composite_rule(p.support(), 129, RuleKind::simpson);
  for (double c : {0.0, 5.0}) {
    const GibbsResult g = gibbs_measure(Vector::Constant(rule.size(), c), p, rule);
    EXPECT_NEAR(g.value, -c, 1e-12);
    EXPECT_NEAR(g.measure.relative_entropy(), 0.0, 1e-12);
    EXPECT_TRUE(g.measure.probabilities().isApprox(rule.weights, 1e-12));
  }
}

TEST(GibbsMeasure, MatchesMirrorDescentOracle) {
  // min over densities on 64 midpoints of D(mu||nu) - <mu, c>, c(x) = -x
  const MomentProblem p = unit_problem(1);
  const QuadratureRule rule = composite_rule(p.support(), 64, RuleKind::midpoint);
  const Vector c = -rule.nodes;
  const GibbsResult g = gibbs_measure(c, p, rule);
  const Vector nu = rule.weights;
  Vector mu = nu;
  auto objective = [&](const Vector& m) {
    double v = 0.0;
    for (Index j = 0; j < m.size(); ++j) v += m(j) * std::log2(m(j) / nu(j)) - m(j) * c(j);
    return v;
  };
  for (int it = 0; it < 2000; ++it) {
    Vector grad(mu.size());
    for (Index j = 0; j < mu.size(); ++j) grad(j) = std::log2(mu(j) / nu(j)) + 1.0 / std::log(2.0) - c(j);
    mu = mu.cwiseProduct((-0.5 * grad).unaryExpr([](double v) { return std::exp(v); }));
    mu /= mu.sum();
  }
  EXPECT_NEAR(g.value, objective(mu), 1e-5);
  EXPECT_LE(g.value, objective(mu) + 1e-12);
}

TEST(DualValue, ZeroAtOrigin) {
  const MomentProblem p = unit_problem(3);
  const QuadratureRule rule = composite_rule(p.support(), 257, RuleKind::simpson);
  EXPECT_NEAR(dual_value(Vector::Zero(3), p, p.target(), rule), 0.0, 1e-14);
}

TEST(DualValue, WeakDuality) {
  // the reference itself is feasible (box around its own moments), so F <= D(nu||nu) = 0
  const MomentProblem p = unit_problem(3, 0.05);
  const QuadratureRule rule = composite_rule(p.support(), 257, RuleKind::simpson);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int t = 0; t < 50; ++t) {
    Vector z(3);
    for (int i = 0; i < 3; ++i) z(i) = n(rng);
    EXPECT_LE(dual_value(z, p, p.target(), rule), 1e-12);
  }
}

TEST(SmoothedDual, OriginValueIsProxOfProjection) {
  Vector y(2);
  y << 2.0, 3.0;
  const MomentProblem p = MomentProblem::with_uniform_radius(SupportInterval(0, 1), y, 0.5);
  const GibbsModel m = GibbsModel::from_problem(p, composite_rule(p.support(), 65, RuleKind::simpson));
  const SmoothingParams eta{0.3, 0.2, Vector()};
  const DualEvaluation ev = smoothed_dual(Vector::Zero(2), eta, m, p.target());
  Vector x0(2);
  x0 << 1.5, 2.5;
  EXPECT_TRUE(ev.x_star.isApprox(x0));
  EXPECT_NEAR(ev.value, 0.5 * eta.eta1 * x0.squaredNorm(), 1e-12);
}

TEST(SmoothedDual, ConvergesToDualAsEtaVanishes) {
  const MomentProblem p = unit_problem(3);
  const GibbsModel m = GibbsModel::from_problem(p, composite_rule(p.support(), 257, RuleKind::simpson));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int t = 0; t < 20; ++t) {
    Vector z(3);
    for (int i = 0; i < 3; ++i) z(i) = n(rng);
    const double F = dual_value(z, m, p.target());
    double prev = std::numeric_limits<double>::infinity();
    for (double e : {1e-1, 1e-3, 1e-5}) {
      const double gap = std::abs(smoothed_dual(z, SmoothingParams{e, e, Vector()}, m, p.target()).value - F);
      EXPECT_LE(gap, prev + 1e-12);
      prev = gap;
    }
    EXPECT_LE(prev, 5e-3);
  }
}

TEST(SmoothedDual, GradientMatchesFiniteDifferences) {
  const MomentProblem p = unit_problem(3);
  const GibbsModel m = GibbsModel::from_problem(p, composite_rule(p.support(), 257, RuleKind::simpson));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 3.0);
  for (const Vector& center : {Vector(), Vector(p.observed())}) {
    for (int t = 0; t < 20; ++t) {
      Vector z(3);
      for (int i = 0; i < 3; ++i) z(i) = n(rng);
      const SmoothingParams eta{0.05, 0.01, center};
      const DualEvaluation ev = smoothed_dual(z, eta, m, p.target());
      const double h = 1e-6;
      Vector fd(3);
      for (int i = 0; i < 3; ++i) {
        Vector a = z, b = z;
        a(i) += h;
        b(i) -= h;
        fd(i) = (smoothed_dual(a, eta, m, p.target()).value - smoothed_dual(b, eta, m, p.target()).value) / (2 * h);
      }
      EXPECT_LE((fd - ev.gradient).norm(), 1e-5 * std::max(1.0, ev.gradient.norm()));
    }
  }
}

TEST(SmoothedDual, RejectsNonPositiveEta) {
  const MomentProblem p = unit_problem(1);
  const GibbsModel m = GibbsModel::from_problem(p, composite_rule(p.support(), 9, RuleKind::simpson));
  EXPECT_THROW(smoothed_dual(Vector::Zero(1), SmoothingParams{0.0, 1.0, Vector()}, m, p.target()), InvalidArgument);
}

TEST(Moments, UniformAtOrigin) {
  const MomentProblem p = unit_problem(4);
  const QuadratureRule rule = composite_rule(p.support(), 1025, RuleKind::simpson);
  const Vector mom = moments_of_gibbs(Vector::Zero(4), p, rule);
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(mom(i), 1.0 / static_cast<double>(i + 2), 1e-12);
}

TEST(Moments, StayInsideTheHull) {
  const MomentProblem p(SupportInterval(-1, 2), Vector::Zero(3), Vector::Constant(3, 0.1));
  const QuadratureRule rule = composite_rule(p.support(), 513, RuleKind::simpson);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 20.0);
  for (int t = 0; t < 50; ++t) {
    Vector z(3);
    for (int i = 0; i < 3; ++i) z(i) = n(rng);
    const Vector mom = moments_of_gibbs(z, p, rule);
    EXPECT_GE(mom(0), -1.0 - 1e-12);
    EXPECT_LE(mom(0), 2.0 + 1e-12);
    EXPECT_GE(mom(1), -1e-12);
    EXPECT_LE(mom(1), 4.0 + 1e-12);
    EXPECT_GE(mom(2), -1.0 - 1e-12);
    EXPECT_LE(mom(2), 8.0 + 1e-12);
  }
}

TEST(Moments, LargeExponentPushesMassToZero) {
  const MomentProblem p = unit_problem(3);
  Vector z(3);
  z << 1000.0, 0.0, 0.0;
  const Vector coarse = moments_of_gibbs(z, p, composite_rule(p.support(), 1025, RuleKind::simpson));
  const Vector fine = moments_of_gibbs(z, p, composite_rule(p.support(), 4097, RuleKind::simpson));
  EXPECT_TRUE(coarse.allFinite());
  EXPECT_LE(coarse(0), 0.01);
  // exact first moment of 2^{-1000x} on [0,1] is about 1/(1000 ln 2)
  EXPECT_NEAR(fine(0), 1.0 / (1000.0 * std::log(2.0)), 1e-5);
  EXPECT_NEAR(coarse(0), fine(0), 1e-4);
}

TEST(Moments, FeatureModelFromMatrix) {
  Matrix f(1, 3);
  f << 0.0, 1.0, 2.0;
  const GibbsModel m = GibbsModel::from_features(Vector::Constant(3, 1.0 / 3.0), f);
  EXPECT_NEAR(moments_of_gibbs(Vector::Zero(1), m)(0), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.norm_bound, 2.0);
  EXPECT_THROW(GibbsModel::from_features(Vector::Zero(3), f), InvalidArgument);
}
