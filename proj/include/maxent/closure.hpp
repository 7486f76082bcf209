#pragma once

// Zero-information moment closure for the reversible dimerization
// 2M <-> D, with exact and stochastic reference solutions.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "maxent/discrete.hpp"
#include "maxent/errors.hpp"
#include "maxent/fast_gradient.hpp"
#include "maxent/gibbs.hpp"
#include "maxent/parallel.hpp"
#include "maxent/problem.hpp"

namespace maxent {

struct DimerizationSystem {
  double k1 = 1.0;
  double k2 = 1.0;
  long M0 = 10;
  long D0 = 0;

  DimerizationSystem() = default;
  DimerizationSystem(double k1_, double k2_, long m0, long d0) : k1(k1_), k2(k2_), M0(m0), D0(d0) { validate(); }

  void validate() const {
    detail::require(k1 > 0.0 && k2 >= 0.0, "rate constants must satisfy k1 > 0, k2 >= 0");
    detail::require(M0 >= 0 && D0 >= 0, "initial counts must be nonnegative");
  }
  /// Conserved total M + 2D.
  long S0() const { return M0 + 2 * D0; }
};

/// (alpha1, alpha2) at monomer count m: 2M -> D fires at k1 m (m-1) and moves
/// m -> m-2, D -> 2M fires at k2 (S0 - m)/2 and moves m -> m+2.
inline std::pair<double, double> dimerization_propensities(const DimerizationSystem& sys, double m) {
  return {sys.k1 * m * (m - 1.0), sys.k2 * (static_cast<double>(sys.S0()) - m) / 2.0};
}

/// d mu/dt = A mu + B zeta with mu = (<m^0>, ..., <m^M>) and zeta = <m^{M+1}>.
struct MomentODE {
  Matrix A;
  Matrix B;
  Index order = 0;
};

namespace detail {

using Poly = std::vector<double>;  // ascending coefficients

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

/// (m + shift)^k - m^k
inline Poly shifted_power_difference(double shift, int k) {
  Poly r(k + 1, 0.0);
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j > 0) binom = binom * (k - j + 1) / j;
    r[j] += binom * std::pow(shift, k - j);
  }
  r[k] -= 1.0;
  return r;
}

}  // namespace detail

inline MomentODE moment_matrices(const DimerizationSystem& sys, Index order) {
  detail::require(order == 2 || order == 3, "moment closure supports order 2 or 3, got " + std::to_string(order));
  const double s0 = static_cast<double>(sys.S0());
  const detail::Poly alpha1{0.0, -sys.k1, sys.k1};
  const detail::Poly alpha2{sys.k2 * s0 / 2.0, -sys.k2 / 2.0};
  MomentODE ode;
  ode.order = order;
  ode.A = Matrix::Zero(order + 1, order + 1);
  ode.B = Matrix::Zero(order + 1, 1);
  for (int k = 1; k <= order; ++k) {
    detail::Poly drift = detail::poly_mul(detail::shifted_power_difference(-2.0, k), alpha1);
    const detail::Poly up = detail::poly_mul(detail::shifted_power_difference(2.0, k), alpha2);
    if (up.size() > drift.size()) drift.resize(up.size(), 0.0);
    for (std::size_t j = 0; j < up.size(); ++j) drift[j] += up[j];
    for (std::size_t j = 0; j < drift.size(); ++j) {
      if (drift[j] == 0.0) continue;
      if (static_cast<Index>(j) <= order) {
        ode.A(k, static_cast<Index>(j)) += drift[j];
      } else if (static_cast<Index>(j) == order + 1) {
        ode.B(k, 0) += drift[j];
      } else {
        throw InvalidArgument("unexpected moment degree in the generator");
      }
    }
  }
  return ode;
}

struct ClosureConfig {
  Index order = 2;
  double kappa = 0.01;
  long support_max = 10;
  bool parity_support = false;  ///< restrict the support to states with the parity of M0
  long parity = 0;
  double eta1 = 10.0;           ///< prox weight (centered at the moment box center)
  double eta2 = 1e-8;
  double gradient_tolerance = 1e-10;
  long max_inner_iterations = 200000;

  void validate() const {
    detail::require(order >= 1, "closure order must be >= 1");
    detail::require(kappa > 0.0, "kappa must be positive");
    detail::require(support_max >= 1, "support_max must be >= 1");
  }
};

/// Solves the maxent subproblems behind phi(mu). Keeps the last dual point as
/// a warm start for the next call.
class ClosureFunction {
 public:
  explicit ClosureFunction(ClosureConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::vector<double> states;
    for (long m = 0; m <= cfg_.support_max; ++m) {
      if (cfg_.parity_support && (m % 2) != (cfg_.parity % 2)) continue;
      states.push_back(static_cast<double>(m));
    }
    const Index n = static_cast<Index>(states.size());
    states_ = Eigen::Map<Vector>(states.data(), n);
    scale_ = static_cast<double>(cfg_.support_max);
    const Vector scaled = states_ / scale_;
    model_ = GibbsModel::from_features(Vector::Constant(n, 1.0 / static_cast<double>(n)),
                                       GibbsModel::monomial_features(scaled, cfg_.order), states_);
    z_ = Vector::Zero(cfg_.order);
  }

  const ClosureConfig& config() const { return cfg_; }
  const Vector& states() const { return states_; }
  const Vector& dual_point() const { return z_; }
  long last_iterations() const { return last_iterations_; }
  void reset() { z_.setZero(); }

  /// Maxent distribution on the support for tracked moments mu = (1, <m>, ..., <m^M>).
  Vector distribution(const Vector& mu) {
    detail::require(mu.size() == cfg_.order + 1, "closure expects M+1 moments");
    detail::require(std::abs(mu(0) - 1.0) <= 1e-9, "zeroth moment must be 1");
    Vector center(cfg_.order);
    Vector radius(cfg_.order);
    for (Index i = 1; i <= cfg_.order; ++i) {
      const double s = std::pow(scale_, static_cast<double>(i));
      center(i - 1) = mu(i) / s;
      radius(i - 1) = cfg_.kappa / s;
    }
    const TargetSet target = TargetSet::box(center, radius);
    // the kappa box must meet the moment hull of the support
    const double lo_m = states_.minCoeff();
    const double hi_m = states_.maxCoeff();
    if (mu(1) + cfg_.kappa < lo_m || mu(1) - cfg_.kappa > hi_m ||
        mu(2) + cfg_.kappa < mu(1) * mu(1) - 2.0 * cfg_.kappa * (1.0 + std::abs(mu(1)))) {
      throw InfeasibleError("closure moments left the realizable region (mean " + std::to_string(mu(1)) +
                            ", second moment " + std::to_string(mu(2)) + ")");
    }
    SolverConfig sc;
    sc.stopping = Stopping::gradient_norm;
    sc.gradient_tolerance = cfg_.gradient_tolerance;
    sc.max_iterations = cfg_.max_inner_iterations;
    sc.eta_override = SmoothingParams{cfg_.eta1, cfg_.eta2, center};
    sc.warm_start = z_;
    const SolveResult r = fast_gradient_solve(model_, target, sc);
    if (!r.z_hat.allFinite()) throw InfeasibleError("closure subproblem diverged");
    z_ = r.z_hat;
    last_iterations_ = r.certificate.iterations;
    return r.measure.probabilities();
  }

  /// zeta = <p*, m^{M+1}>, ..., <p*, m^{M+extra}>.
  Vector operator()(const Vector& mu, Index extra = 1) {
    const Vector p = distribution(mu);
    Vector out(extra);
    for (Index j = 0; j < extra; ++j) {
      out(j) = p.dot(states_.array().pow(static_cast<double>(cfg_.order + 1 + j)).matrix());
    }
    return out;
  }

 private:
  ClosureConfig cfg_;
  Vector states_;
  double scale_ = 1.0;
  GibbsModel model_;
  Vector z_;
  long last_iterations_ = 0;
};

/// One-shot closure evaluation from a cold start.
inline Vector closure_function(const Vector& mu, const ClosureConfig& cfg, Index extra = 1) {
  ClosureFunction f(cfg);
  return f(mu, extra);
}

struct TrajectoryPoint {
  double t = 0.0;
  Vector moments;  ///< (1, <m>, ..., <m^M>)
};

struct IntegrationOptions {
  double t_end = 1.0;
  double dt = 0.005;
  double tolerance = 1e-6;  ///< accepted deviation between one step and two half steps
  double min_step = 1e-10;
};

/// Classical RK4 on d mu/dt = A mu + B phi(mu). Each step is compared with
/// two half steps and halved until they agree; output every dt.
inline std::vector<TrajectoryPoint> integrate_closure_ode(const DimerizationSystem& sys, const ClosureConfig& cfg,
                                                          const IntegrationOptions& opt) {
  sys.validate();
  detail::require(opt.dt > 0.0 && opt.t_end > 0.0, "t_end and dt must be positive");
  const MomentODE ode = moment_matrices(sys, cfg.order);
  ClosureConfig c = cfg;
  c.parity = sys.M0 % 2;
  ClosureFunction phi(c);
  auto rhs = [&](const Vector& mu) -> Vector {
    const Vector zeta = phi(mu, ode.B.cols());
    return ode.A * mu + ode.B * zeta;
  };
  auto rk4 = [&](const Vector& y, double h) -> Vector {
    const Vector a = rhs(y);
    const Vector b = rhs(y + 0.5 * h * a);
    const Vector cc = rhs(y + 0.5 * h * b);
    const Vector d = rhs(y + h * cc);
    return y + h / 6.0 * (a + 2.0 * b + 2.0 * cc + d);
  };

  Vector mu(cfg.order + 1);
  for (Index i = 0; i <= cfg.order; ++i) mu(i) = std::pow(static_cast<double>(sys.M0), static_cast<double>(i));
  std::vector<TrajectoryPoint> out;
  out.push_back({0.0, mu});
  const long steps = static_cast<long>(std::llround(opt.t_end / opt.dt));
  double t = 0.0;
  for (long s = 1; s <= steps; ++s) {
    const double t_next = static_cast<double>(s) * opt.dt;
    while (t < t_next - 1e-14) {
      double h = t_next - t;
      for (;;) {
        if (h < opt.min_step) {
          throw ConvergenceError("closure ODE step underflow at t=" + std::to_string(t));
        }
        Vector full, half;
        try {
          full = rk4(mu, h);
          half = rk4(rk4(mu, 0.5 * h), 0.5 * h);
        } catch (const InfeasibleError&) {
          // a stage left the realizable region: treat as a rejected step
          h *= 0.5;
          continue;
        }
        const double dev = (full - half).cwiseAbs().maxCoeff() / std::max(1.0, half.cwiseAbs().maxCoeff());
        if (dev < opt.tolerance) {
          mu = half;
          t += h;
          break;
        }
        h *= 0.5;
      }
    }
    t = t_next;
    out.push_back({t, mu});
  }
  return out;
}

struct SsaResult {
  Vector times;
  Matrix mean;            ///< rows = times, cols = <m>, <m^2>, <m^3>
  Matrix standard_error;  ///< same layout
  long trajectories = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Gillespie direct method; trajectory i uses a generator seeded from (seed, i).
inline SsaResult ssa_simulate(const DimerizationSystem& sys, long n_traj, const Vector& t_grid, std::uint64_t seed) {
  sys.validate();
  detail::require(n_traj >= 1, "n_traj must be >= 1");
  detail::require(t_grid.size() >= 1, "time grid must be non-empty");
  const Index g = t_grid.size();
  const long block = 1024;
  const long n_blocks = (n_traj + block - 1) / block;
  std::vector<Matrix> sums(n_blocks, Matrix::Zero(g, 3));
  std::vector<Matrix> sq(n_blocks, Matrix::Zero(g, 3));
  parallel_for(
      n_blocks,
      [&](long b) {
        const long begin = b * block;
        const long end = std::min(n_traj, begin + block);
        for (long i = begin; i < end; ++i) {
          std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(i))));
          std::uniform_real_distribution<double> unif(0.0, 1.0);
          double m = static_cast<double>(sys.M0);
          double t = 0.0;
          Index next = 0;
          for (;;) {
            const auto [a1, a2] = dimerization_propensities(sys, m);
            const double total = a1 + a2;
            const double tau = total > 0.0 ? -std::log(1.0 - unif(rng)) / total : std::numeric_limits<double>::infinity();
            const double t_jump = t + tau;
            while (next < g && t_grid(next) < t_jump) {
              const double v[3] = {m, m * m, m * m * m};
              for (int k = 0; k < 3; ++k) {
                sums[b](next, k) += v[k];
                sq[b](next, k) += v[k] * v[k];
              }
              ++next;
            }
            if (next >= g) break;
            t = t_jump;
            m += (unif(rng) * total < a1) ? -2.0 : 2.0;
          }
        }
      },
      1);
  Matrix s = Matrix::Zero(g, 3);
  Matrix q = Matrix::Zero(g, 3);
  for (long b = 0; b < n_blocks; ++b) {
    s += sums[b];
    q += sq[b];
  }
  SsaResult r;
  r.times = t_grid;
  r.trajectories = n_traj;
  const double n = static_cast<double>(n_traj);
  r.mean = s / n;
  const Matrix var = (q / n - r.mean.cwiseProduct(r.mean)).cwiseMax(0.0) * (n / std::max(1.0, n - 1.0));
  r.standard_error = (var / n).cwiseSqrt();
  return r;
}

struct CmeStationary {
  Vector states;
  Vector distribution;
  Vector moments;  ///< <m>, <m^2>, <m^3>
  double detailed_balance_residual = 0.0;
};

namespace detail {

inline std::pair<Vector, Matrix> cme_generator(const DimerizationSystem& sys) {
  const long s0 = sys.S0();
  detail::require(s0 <= 10000, "exact CME oracle supports S0 <= 10^4");
  std::vector<double> st;
  for (long m = sys.M0 % 2; m <= s0; m += 2) st.push_back(static_cast<double>(m));
  const Index n = static_cast<Index>(st.size());
  Vector states = Eigen::Map<Vector>(st.data(), n);
  Matrix Q = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto [a1, a2] = dimerization_propensities(sys, states(i));
    if (i > 0) Q(i, i - 1) = a1;
    if (i + 1 < n) Q(i, i + 1) = a2;
    Q(i, i) = -(Q.row(i).sum());
  }
  return {states, Q};
}

}  // namespace detail

/// Stationary law of the finite jump chain by solving pi Q = 0, sum pi = 1.
inline CmeStationary exact_cme_stationary(const DimerizationSystem& sys) {
  sys.validate();
  auto [states, Q] = detail::cme_generator(sys);
  const Index n = states.size();
  Matrix A(n + 1, n);
  A.topRows(n) = Q.transpose();
  A.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b(n) = 1.0;
  const Vector pi = A.colPivHouseholderQr().solve(b);
  if (!pi.allFinite() || (A * pi - b).norm() > 1e-8) throw Error("stationary solve failed for the CME generator");
  CmeStationary out;
  out.states = states;
  out.distribution = pi.cwiseMax(0.0) / pi.cwiseMax(0.0).sum();
  out.moments.resize(3);
  for (int k = 1; k <= 3; ++k) out.moments(k - 1) = out.distribution.dot(states.array().pow(k).matrix());
  double res = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    res = std::max(res, std::abs(out.distribution(i) * Q(i, i + 1) - out.distribution(i + 1) * Q(i + 1, i)));
  }
  out.detailed_balance_residual = res;
  return out;
}

/// Exact moments at the grid times by RK4 on the forward equation dp/dt = p Q.
inline Matrix exact_cme_moments(const DimerizationSystem& sys, const Vector& t_grid, double dt = 1e-4) {
  sys.validate();
  auto [states, Q] = detail::cme_generator(sys);
  const Index n = states.size();
  Vector p = Vector::Zero(n);
  p((sys.M0 - sys.M0 % 2) / 2) = 1.0;
  const Matrix Qt = Q.transpose();
  Matrix out(t_grid.size(), 3);
  double t = 0.0;
  for (Index k = 0; k < t_grid.size(); ++k) {
    while (t < t_grid(k) - 1e-14) {
      const double h = std::min(dt, t_grid(k) - t);
      const Vector a = Qt * p;
      const Vector b = Qt * (p + 0.5 * h * a);
      const Vector c = Qt * (p + 0.5 * h * b);
      const Vector d = Qt * (p + h * c);
      p += h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
      t += h;
    }
    for (int j = 1; j <= 3; ++j) out(k, j - 1) = p.dot(states.array().pow(j).matrix());
  }
  return out;
}

}  // namespace maxent
