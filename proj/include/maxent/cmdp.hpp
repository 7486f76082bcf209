#pragma once

// Approximate dynamic programming for a constrained long-run average cost
// MDP, instantiated on a single-product inventory system with exponential
// demand. States and actions are normalized to [0,1]; the occupation measure
// lives on a product grid.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/fast_gradient.hpp"
#include "maxent/gibbs.hpp"
#include "maxent/integration.hpp"
#include "maxent/parallel.hpp"
#include "maxent/problem.hpp"

namespace maxent {

struct InventoryModel {
  double capacity = 1.0;  // C
  double lambda = 0.5;    // demand rate
  double v = 1.0;         // sale price
  double p = 0.5;         // production cost
  double h = 0.1;         // holding cost
  double ell1 = 0.0;      // lower bound on the mean stock
  double ell2 = 1.0;      // upper bound on the second moment of the stock

  void validate() const {
    detail::require(capacity > 0.0 && lambda > 0.0, "capacity and demand rate must be positive");
    detail::require(v > 0.0 && p > 0.0 && h > 0.0, "prices and costs must be positive");
    detail::require(ell1 >= 0.0 && ell2 >= 0.0, "ell1 and ell2 must be nonnegative");
    detail::require(ell1 * ell1 < ell2, "constraint set has empty interior: need ell1^2 < ell2");
  }
  double shift() const { return 2.0 * v * capacity; }
  /// Lipschitz constant of the normalized transition kernel.
  double kernel_lipschitz() const { return std::sqrt(2.0) * capacity * lambda; }
};

/// Stage cost before the nonnegativity shift (negative expected profit).
inline double inventory_raw_cost(const InventoryModel& m, double s, double a) {
  const double x = m.capacity * (s + a);
  const double lx = m.lambda * x;
  const double e = std::exp(-lx);
  return -m.v * x * e - (m.v / m.lambda) * (1.0 - e * (lx + 1.0)) + m.p * m.capacity * a + m.h * x;
}

inline double inventory_cost(const InventoryModel& m, double s, double a) {
  return inventory_raw_cost(m, s, a) + m.shift();
}

/// (Qu)(s,a) for next state (min{1,s+a} - demand/C)^+.
/// The atom at zero is exact; the density part uses composite Simpson.
inline double inventory_kernel_apply(const InventoryModel& m, const std::function<double(double)>& u, double s,
                                     double a, Index panels = 200) {
  const double w = std::min(1.0, s + a);
  const double rate = m.lambda * m.capacity;
  double out = u(0.0) * std::exp(-rate * w);
  if (w <= 0.0) return out;
  if (panels % 2) ++panels;
  const double hstep = w / static_cast<double>(panels);
  double acc = 0.0;
  for (Index j = 0; j <= panels; ++j) {
    const double y = hstep * static_cast<double>(j);
    const double c = (j == 0 || j == panels) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    acc += c * u(y) * rate * std::exp(-rate * (w - y));
  }
  return out + acc * hstep / 3.0;
}

struct StateActionGrid {
  Index n_s = 0;
  Index n_a = 0;
  Vector s;  ///< state coordinate per node
  Vector a;  ///< action coordinate per node
  Vector weights;

  static StateActionGrid uniform(Index n_s, Index n_a) {
    detail::require(n_s >= 2 && n_a >= 2, "state-action grid needs at least 2 points per axis");
    StateActionGrid g;
    g.n_s = n_s;
    g.n_a = n_a;
    const Vector sv = Vector::LinSpaced(n_s, 0.0, 1.0);
    const Vector av = Vector::LinSpaced(n_a, 0.0, 1.0);
    g.s.resize(n_s * n_a);
    g.a.resize(n_s * n_a);
    for (Index i = 0; i < n_s; ++i)
      for (Index j = 0; j < n_a; ++j) {
        g.s(i * n_a + j) = sv(i);
        g.a(i * n_a + j) = av(j);
      }
    g.weights = Vector::Constant(n_s * n_a, 1.0 / static_cast<double>(n_s * n_a));
    return g;
  }
  Index size() const { return weights.size(); }
};

struct BasisSet {
  Index n = 0;
  double theta = 3.0;
  std::vector<std::function<double(double)>> functions;
  std::vector<double> sup_norms;
};

/// u_{2i-1} = (C/2i pi) cos(2 i pi s / C), u_{2i} = (C/2i pi) sin(2 i pi s / C).
inline BasisSet fourier_basis(Index n, double capacity, double theta = 3.0) {
  detail::require(n >= 2 && n % 2 == 0, "Fourier basis size must be a positive even number");
  detail::require(theta > 0.0, "theta must be positive");
  detail::require(capacity > 0.0, "capacity must be positive");
  BasisSet b;
  b.n = n;
  b.theta = theta;
  for (Index i = 1; i <= n / 2; ++i) {
    const double f = 2.0 * static_cast<double>(i) * std::numbers::pi / capacity;
    const double amp = capacity / (2.0 * static_cast<double>(i) * std::numbers::pi);
    b.functions.emplace_back([f, amp](double x) { return amp * std::cos(f * x); });
    b.functions.emplace_back([f, amp](double x) { return amp * std::sin(f * x); });
    b.sup_norms.push_back(amp);
    b.sup_norms.push_back(amp);
  }
  return b;
}

/// Everything the outer loop needs on the grid, computed once.
struct CmdpData {
  InventoryModel model;
  StateActionGrid grid;
  BasisSet basis;
  Vector cost;        ///< shifted stage cost per node
  Matrix drift;       ///< n x N, row i is Qu_i - u_i at the nodes
  Matrix features;    ///< 2 x N, rows s and s^2

  static CmdpData build(const InventoryModel& model, const StateActionGrid& grid, const BasisSet& basis,
                        Index kernel_panels = 200) {
    model.validate();
    CmdpData d;
    d.model = model;
    d.grid = grid;
    d.basis = basis;
    const Index N = grid.size();
    d.cost.resize(N);
    for (Index j = 0; j < N; ++j) d.cost(j) = inventory_cost(model, grid.s(j), grid.a(j));
    d.drift.resize(basis.n, N);
    parallel_for(
        N,
        [&](long j) {
          for (Index i = 0; i < basis.n; ++i) {
            const auto& u = basis.functions[static_cast<std::size_t>(i)];
            d.drift(i, j) = inventory_kernel_apply(model, u, grid.s(j), grid.a(j), kernel_panels) - u(grid.s(j));
          }
        },
        64);
    d.features.resize(2, N);
    d.features.row(0) = grid.s.transpose();
    d.features.row(1) = grid.s.cwiseProduct(grid.s).transpose();
    return d;
  }
};

/// (T_n mu) = (-1, <Qu_1 - u_1, mu>, ..., <Qu_n - u_n, mu>).
inline Vector tn_operator(const Vector& mu, const CmdpData& data) {
  detail::require(mu.size() == data.grid.size(), "measure does not live on the grid");
  detail::require(std::abs(mu.sum() - 1.0) <= 1e-8 && (mu.array() >= -1e-14).all(),
                  "tn_operator needs a probability vector");
  Vector out(data.basis.n + 1);
  out(0) = -1.0;
  out.tail(data.basis.n) = data.drift * mu;
  return out;
}

/// (alpha - q) * min{1, theta / ||q - alpha||}.
inline Vector clipped_map(const Vector& q, const Vector& alpha, double theta) {
  detail::require(q.size() == alpha.size(), "clipped_map dimension mismatch");
  const Vector diff = alpha - q;
  const double nrm = diff.norm();
  if (nrm <= theta || nrm == 0.0) return diff;
  return diff * (theta / nrm);
}

struct AdpConfig {
  double zeta = 0.031622776601683794;  // 10^-1.5
  long outer_iterations = 200;
  long inner_iterations = 1500;
  double inner_eta = 1e-3;
  /// When set, inner solves stop on the gradient norm instead of a fixed budget.
  std::optional<double> inner_gradient_tolerance;

  void validate() const {
    detail::require(zeta > 0.0, "zeta must be positive");
    detail::require(outer_iterations >= 0, "outer iteration count must be nonnegative");
    detail::require(inner_iterations >= 1, "inner iteration budget must be >= 1");
    detail::require(inner_eta > 0.0, "inner smoothing parameter must be positive");
  }
};

struct SubproblemResult {
  Vector y;             ///< grid weights
  Vector z;             ///< dual point, reused as the next warm start
  Vector moments;       ///< (<y,s>, <y,s^2>)
  double feasibility = 0.0;
  long iterations = 0;
};

/// argmin over {y : <y,s> >= ell1, <y,s^2> <= ell2} of KL(y||ref) + <y, c_{alpha,zeta}>.
/// The relative entropy is in nats here, so the linear term enters the
/// base-2 Gibbs exponent divided by ln 2.
inline SubproblemResult entropic_subproblem(const Vector& alpha, const AdpConfig& cfg, const CmdpData& data,
                                            const std::optional<Vector>& warm_start = std::nullopt) {
  cfg.validate();
  data.model.validate();
  detail::require(alpha.size() == data.basis.n + 1, "alpha must have n+1 entries");
  Vector c = data.cost.array() - alpha(0);
  c += data.drift.transpose() * alpha.tail(data.basis.n);
  c /= cfg.zeta;

  GibbsModel gm;
  gm.nodes = Vector::LinSpaced(data.grid.size(), 0.0, static_cast<double>(data.grid.size() - 1));
  gm.weights = data.grid.weights;
  gm.features = data.features;
  gm.cost = c / std::numbers::ln2;
  gm.norm_bound = std::sqrt(2.0);  // s, s^2 in [0,1]

  const TargetSet target = TargetSet::box_parabola(data.model.ell1, data.model.ell2);
  SolverConfig sc;
  sc.eta_override = SmoothingParams{cfg.inner_eta, cfg.inner_eta, Vector()};
  sc.max_iterations = cfg.inner_iterations;
  if (cfg.inner_gradient_tolerance) {
    sc.stopping = Stopping::gradient_norm;
    sc.gradient_tolerance = *cfg.inner_gradient_tolerance;
  } else {
    sc.stopping = Stopping::fixed;
  }
  sc.warm_start = warm_start;
  const SolveResult r = fast_gradient_solve(gm, target, sc);
  SubproblemResult out;
  out.y = r.measure.probabilities();
  out.y /= out.y.sum();
  out.z = r.z_hat;
  out.moments = data.features * out.y;
  out.feasibility = target.distance(out.moments);
  out.iterations = r.certificate.iterations;
  return out;
}

struct AdpTraceRow {
  long iteration = 0;
  double J = 0.0;              ///< objective with the shifted cost
  double w_norm = 0.0;
  double margin_mean = 0.0;    ///< ell1 - <y_hat, s>, <= 0 when feasible
  double margin_second = 0.0;  ///< <y_hat, s^2> - ell2
  double inner_feasibility = 0.0;
};

struct AdpResult {
  double J = 0.0;           ///< with the shifted cost
  double J_unshifted = 0.0;
  Vector y_hat;
  Vector margins;           ///< <y_hat, d> - kappa
  double max_inner_feasibility = 0.0;
  double max_w_norm = 0.0;
  std::vector<AdpTraceRow> trace;
};

namespace detail {

inline double adp_objective(const Vector& y, const CmdpData& data, double theta) {
  // T_n y - e has a zero first entry
  return data.cost.dot(y) + theta * (data.drift * y).norm();
}

}  // namespace detail

/// Runs the outer scheme for cfg.outer_iterations steps. The trace records J
/// for the running weighted average after every step, so its last entry is
/// the reported output.
inline AdpResult adp_solve(const CmdpData& data, const AdpConfig& cfg,
                                std::optional<Vector> w0 = std::nullopt) {
  cfg.validate();
  const Index n = data.basis.n;
  const double theta = data.basis.theta;
  Vector w = w0.value_or(Vector::Zero(n + 1));
  detail::require(w.size() == n + 1, "initial w must have n+1 entries");
  detail::require(w.norm() <= theta * (1.0 + 1e-12), "initial w must satisfy ||w|| <= theta");

  Vector e = Vector::Zero(n + 1);
  e(0) = -1.0;
  Vector r_sum = Vector::Zero(n + 1);
  Vector y_acc = Vector::Zero(data.grid.size());
  double acc_weight = 0.0;
  std::optional<Vector> warm;

  AdpResult out;
  out.max_w_norm = w.norm();
  const long k = cfg.outer_iterations;
  for (long l = 0; l <= k; ++l) {
    SubproblemResult sub;
    try {
      sub = entropic_subproblem(w, cfg, data, warm);
    } catch (const Error& ex) {
      throw ConvergenceError("entropic subproblem failed at outer iteration " + std::to_string(l) + ": " +
                             ex.what());
    }
    warm = sub.z;
    out.max_inner_feasibility = std::max(out.max_inner_feasibility, sub.feasibility);

    const Vector r = (cfg.zeta / (4.0 * static_cast<double>(n))) * (e - tn_operator(sub.y, data));
    r_sum += 0.5 * static_cast<double>(l + 1) * r;
    const Vector z = clipped_map(r_sum, Vector::Zero(n + 1), theta);
    const Vector beta = clipped_map(r, w, theta);
    const double ld = static_cast<double>(l);
    w = (2.0 / (ld + 3.0)) * z + ((ld + 1.0) / (ld + 3.0)) * beta;
    out.max_w_norm = std::max(out.max_w_norm, w.norm());

    // the weights 2(j+1)/((k+1)(k+2)) are proportional to j+1
    y_acc += static_cast<double>(l + 1) * sub.y;
    acc_weight += static_cast<double>(l + 1);
    const Vector y_hat = y_acc / acc_weight;
    const Vector mom = data.features * y_hat;
    AdpTraceRow row;
    row.iteration = l;
    row.J = detail::adp_objective(y_hat, data, theta);
    row.w_norm = w.norm();
    row.margin_mean = data.model.ell1 - mom(0);
    row.margin_second = mom(1) - data.model.ell2;
    row.inner_feasibility = sub.feasibility;
    out.trace.push_back(row);
  }
  out.y_hat = y_acc / acc_weight;
  out.J = out.trace.back().J;
  out.J_unshifted = out.J - data.model.shift();
  out.margins = Vector(2);
  out.margins << out.trace.back().margin_mean, out.trace.back().margin_second;
  return out;
}

/// max{sup|c|, Lipschitz constant w.r.t. the sup-norm}, estimated on a fine grid.
inline double cost_lipschitz_norm(const InventoryModel& m, Index resolution = 201) {
  const Vector t = Vector::LinSpaced(resolution, 0.0, 1.0);
  const double step = t(1) - t(0);
  Matrix c(resolution, resolution);
  for (Index i = 0; i < resolution; ++i)
    for (Index j = 0; j < resolution; ++j) c(i, j) = inventory_cost(m, t(i), t(j));
  double lip = 0.0;
  for (Index i = 0; i < resolution; ++i)
    for (Index j = 0; j < resolution; ++j) {
      if (i + 1 < resolution) lip = std::max(lip, std::abs(c(i + 1, j) - c(i, j)) / step);
      if (j + 1 < resolution) lip = std::max(lip, std::abs(c(i, j + 1) - c(i, j)) / step);
      if (i + 1 < resolution && j + 1 < resolution)
        lip = std::max(lip, std::abs(c(i + 1, j + 1) - c(i, j)) / step);
    }
  return std::max(c.cwiseAbs().maxCoeff(), lip);
}

/// A-priori error bound on J for k outer steps given the basis residual.
inline double adp_error_bound(const InventoryModel& m, const BasisSet& basis, const AdpConfig& cfg, long k,
                             double residual) {
  detail::require(k >= 1, "bound needs k >= 1");
  detail::require(residual >= 0.0, "residual must be nonnegative");
  const double dim = 2.0;
  const double lq = std::max(m.kernel_lipschitz(), 1.0);
  const double n = static_cast<double>(basis.n);
  const double beta =
      (std::numbers::e / dim) * (basis.theta * std::sqrt(n) * (lq + 1.0) + cost_lipschitz_norm(m));
  const double kd = static_cast<double>(k);
  return (1.0 + lq) * residual + 4.0 * n * n * basis.theta / (kd * kd * cfg.zeta) +
         dim * cfg.zeta * std::max(std::log(beta / cfg.zeta), 1.0);
}

}  // namespace maxent
