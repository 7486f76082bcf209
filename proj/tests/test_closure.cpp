#include <gtest/gtest.h>

#include <cmath>

#include "maxent/closure.hpp"

using namespace maxent;

TEST(Dimerization, Propensities) {
  const DimerizationSystem sys(1.0, 1.0, 10, 0);
  EXPECT_EQ(sys.S0(), 10);
  const auto [a1, a2] = dimerization_propensities(sys, 4.0);
  EXPECT_DOUBLE_EQ(a1, 12.0);
  EXPECT_DOUBLE_EQ(a2, 3.0);
  EXPECT_THROW(DimerizationSystem(0.0, 1.0, 10, 0), InvalidArgument);
  EXPECT_THROW(DimerizationSystem(1.0, 1.0, -1, 0), InvalidArgument);
}

TEST(MomentMatrices, SecondOrder) {
  const DimerizationSystem sys(1.0, 1.0, 10, 0);
  const MomentODE ode = moment_matrices(sys, 2);
  Matrix a(3, 3);
  a << 0, 0, 0,
       10, 1, -2,
       20, 14, 6;
  EXPECT_TRUE(ode.A.isApprox(a)) << ode.A;
  ASSERT_EQ(ode.B.rows(), 3);
  EXPECT_DOUBLE_EQ(ode.B(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(ode.B(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(ode.B(2, 0), -4.0);
  EXPECT_TRUE(ode.A.row(0).isZero());
}

TEST(MomentMatrices, ThirdOrder) {
  const DimerizationSystem sys(2.0, 1.0, 10, 0);
  const MomentODE ode = moment_matrices(sys, 3);
  EXPECT_EQ(ode.A.rows(), 4);
  EXPECT_DOUBLE_EQ(ode.B(3, 0), -6.0 * sys.k1);
  EXPECT_THROW(moment_matrices(sys, 4), InvalidArgument);
}

TEST(MomentMatrices, ExactOnPolynomialTest) {
  // d/dt <m^k> = <alpha1 ((m-2)^k - m^k) + alpha2 ((m+2)^k - m^k)> checked on a point mass
  const DimerizationSystem sys(1.5, 0.7, 10, 0);
  const MomentODE ode = moment_matrices(sys, 3);
  const double m = 5.0;
  Vector mu(4);
  mu << 1, m, m * m, m * m * m;
  const auto [a1, a2] = dimerization_propensities(sys, m);
  for (int k = 1; k <= 3; ++k) {
    const double want = a1 * (std::pow(m - 2, k) - std::pow(m, k)) + a2 * (std::pow(m + 2, k) - std::pow(m, k));
    const double got = ode.A.row(k).dot(mu) + ode.B(k, 0) * std::pow(m, 4);
    EXPECT_NEAR(got, want, 1e-9) << "k=" << k;
  }
}

TEST(ClosureFunction, HugeKappaGivesUniform) {
  ClosureConfig cfg;
  cfg.kappa = 1e9;
  cfg.eta1 = 1e-12;  // the prox pull toward the box center would otherwise act as a soft constraint
  Vector mu(3);
  mu << 1.0, 5.0, 30.0;
  const Vector z = closure_function(mu, cfg);
  EXPECT_NEAR(z(0), 3025.0 / 11.0, 1e-3);
}

TEST(ClosureFunction, PointMass) {
  ClosureConfig cfg;
  Vector mu(3);
  mu << 1.0, 4.0, 16.0;
  const Vector z = closure_function(mu, cfg);
  EXPECT_NEAR(z(0), 64.0, 1.0);
}

TEST(ClosureFunction, CauchySchwarz) {
  ClosureConfig cfg;
  ClosureFunction phi(cfg);
  for (double mean : {2.0, 5.0, 7.5}) {
    Vector mu(3);
    mu << 1.0, mean, mean * mean + 2.0;
    const Vector p = phi.distribution(mu);
    const Vector s = phi.states();
    const double m2 = p.dot(s.cwiseProduct(s));
    const double m3 = p.dot(s.array().cube().matrix());
    const double m4 = p.dot(s.array().pow(4.0).matrix());
    EXPECT_LE(m3 * m3, m2 * m4 * (1 + 1e-12));
    EXPECT_NEAR(p.dot(s), mean, 0.05);
  }
}

TEST(ClosureFunction, RejectsUnrealizableMoments) {
  ClosureConfig cfg;
  Vector mu(3);
  mu << 1.0, 5.0, 10.0;  // variance -15
  EXPECT_THROW(closure_function(mu, cfg), InfeasibleError);
  mu << 1.0, 12.0, 144.0;  // mean beyond the support
  EXPECT_THROW(closure_function(mu, cfg), InfeasibleError);
}

TEST(Cme, DetailedBalance) {
  for (double k2 : {1.0, 10.0}) {
    const CmeStationary st = exact_cme_stationary(DimerizationSystem(1.0, k2, 10, 0));
    EXPECT_LE(st.detailed_balance_residual, 1e-10);
    EXPECT_NEAR(st.distribution.sum(), 1.0, 1e-12);
  }
}

TEST(Cme, AbsorbingWithoutBackwardRate) {
  // k2 = 0: every pair dimerizes, mass ends at m = 0
  const DimerizationSystem sys(1.0, 0.0, 10, 0);
  Vector t(1);
  t << 20.0;
  const Matrix m = exact_cme_moments(sys, t, 1e-3);
  EXPECT_NEAR(m(0, 0), 0.0, 1e-6);
}

TEST(Cme, TimeRescaling) {
  Vector t1(1), t2(1);
  t1 << 0.5;
  t2 << 0.25;
  const Matrix a = exact_cme_moments(DimerizationSystem(1.0, 1.0, 10, 0), t1, 1e-4);
  const Matrix b = exact_cme_moments(DimerizationSystem(2.0, 2.0, 10, 0), t2, 5e-5);
  EXPECT_NEAR(a(0, 1), b(0, 1), 1e-6);
}

TEST(Ssa, DeterministicForSeed) {
  const DimerizationSystem sys(1.0, 1.0, 10, 0);
  Vector t(2);
  t << 0.5, 1.0;
  const SsaResult a = ssa_simulate(sys, 500, t, 42);
  const SsaResult b = ssa_simulate(sys, 500, t, 42);
  EXPECT_TRUE(a.mean.isApprox(b.mean));
  const SsaResult c = ssa_simulate(sys, 500, t, 43);
  EXPECT_FALSE(a.mean.isApprox(c.mean));
}

TEST(Ssa, AgreesWithCme) {
  const DimerizationSystem sys(1.0, 1.0, 10, 0);
  Vector t(1);
  t << 1.0;
  const SsaResult s = ssa_simulate(sys, 20000, t, 7);
  const Matrix exact = exact_cme_moments(sys, t);
  EXPECT_NEAR(s.mean(0, 1), exact(0, 1), 5.0 * s.standard_error(0, 1));
}

TEST(ClosureOde, TracksTheCmeForFastDimerization) {
  const DimerizationSystem sys(1.0, 10.0, 10, 0);
  ClosureConfig cfg;
  cfg.support_max = sys.S0();
  IntegrationOptions opt;
  opt.t_end = 1.0;
  opt.dt = 0.05;
  const auto traj = integrate_closure_ode(sys, cfg, opt);
  ASSERT_FALSE(traj.empty());
  EXPECT_NEAR(traj.back().t, 1.0, 1e-12);
  EXPECT_NEAR(traj.back().moments(2), exact_cme_stationary(sys).moments(1), 0.01 * 29.54);
  EXPECT_NEAR(traj.front().moments(1), 10.0, 1e-12);
}
