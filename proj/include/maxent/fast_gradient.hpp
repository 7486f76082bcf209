#pragma once

// Smoothed accelerated dual ascent with a-priori iteration counts and
// a-posteriori certificates.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/gibbs.hpp"
#include "maxent/problem.hpp"

namespace maxent {

/// Strictly feasible reference point: C = D(mu0||nu), delta = ball radius of
/// A mu0 inside T.
struct SlaterData {
  double C = 0.0;
  double delta = 0.0;
  std::optional<GridMeasure> slater_measure;

  void validate() const {
    detail::require(C > 0.0 && std::isfinite(C), "Slater constant C must be positive");
    detail::require(delta > 0.0 && std::isfinite(delta), "Slater radius delta must be positive");
  }
};

/// How the prox-diameter D of T enters the smoothing parameters.
///  half_squared_norm: D = max_T ||x||^2 / 2, the bound on the prox term.
///  half_norm:         D = max_T ||x|| / 2.
enum class DiameterPolicy { half_squared_norm, half_norm };

inline double prox_diameter(const TargetSet& target, DiameterPolicy policy = DiameterPolicy::half_squared_norm,
                            const Vector& center = Vector()) {
  const double r = center.size() > 0 ? target.max_distance_from(center) : target.max_norm();
  return policy == DiameterPolicy::half_squared_norm ? 0.5 * r * r : 0.5 * r;
}

/// eta1 = eps / (4D), eta2 = eps delta^2 / (2 C^2).
inline SmoothingParams smoothing_for_accuracy(double epsilon, const SlaterData& slater, const TargetSet& target,
                                              DiameterPolicy policy = DiameterPolicy::half_squared_norm,
                                              const Vector& prox_center = Vector()) {
  detail::require(epsilon > 0.0, "epsilon must be positive");
  slater.validate();
  const double d = prox_diameter(target, policy, prox_center);
  SmoothingParams eta;
  eta.prox_center = prox_center;
  // T = {0} makes the support term linear; any eta1 works, use eps
  eta.eta1 = d > 0.0 ? epsilon / (4.0 * d) : epsilon;
  eta.eta2 = epsilon * slater.delta * slater.delta / (2.0 * slater.C * slater.C);
  return eta;
}

struct IterationCounts {
  double n1 = 0.0;
  double n2 = 0.0;
  long n = 0;
};

inline IterationCounts apriori_iterations(double epsilon, const SlaterData& slater, double norm_bound,
                                          const TargetSet& target,
                                          DiameterPolicy policy = DiameterPolicy::half_squared_norm,
                                          const Vector& prox_center = Vector()) {
  detail::require(epsilon > 0.0, "epsilon must be positive");
  slater.validate();
  const double C = slater.C;
  const double dl = slater.delta;
  const double eps = epsilon;
  const double D = prox_diameter(target, policy, prox_center);
  const double a2 = norm_bound * norm_bound;
  const double pre =
      2.0 * std::sqrt(8.0 * D * C * C / (eps * eps * dl * dl) + 2.0 * a2 * C * C / (eps * dl * dl) + 1.0);
  IterationCounts out;
  out.n1 = pre * std::log(10.0 * (eps + 2.0 * C) / eps);
  const double inner =
      C / (eps * dl * (2.0 - std::sqrt(3.0))) *
      std::sqrt(4.0 * (4.0 * D / eps + a2 + eps * dl * dl / (2.0 * C * C)) * (C + eps / 2.0));
  out.n2 = pre * std::log(inner);
  out.n = static_cast<long>(std::ceil(std::max({out.n1, out.n2, 0.0})));
  return out;
}

inline IterationCounts apriori_iterations(double epsilon, const SlaterData& slater, const MomentProblem& problem,
                                          const TargetSet& target,
                                          DiameterPolicy policy = DiameterPolicy::half_squared_norm) {
  return apriori_iterations(epsilon, slater, operator_norm_bound(problem), target, policy);
}

enum class Stopping {
  apriori,        ///< run N(eps) iterations
  aposteriori,    ///< every `block` iterations stop once the certificate gap <= eps
  gradient_norm,  ///< stop once ||grad F_eta|| <= gradient_tolerance
  fixed,          ///< run exactly max_iterations
};

struct SolverConfig {
  double epsilon = 0.01;
  Stopping stopping = Stopping::apriori;
  long block = 50;
  std::optional<SmoothingParams> eta_override;
  long max_iterations = 1000000;
  double gradient_tolerance = 1e-8;
  DiameterPolicy diameter = DiameterPolicy::half_squared_norm;
  bool record_trace = false;
  std::optional<Vector> warm_start;
  /// Center the prox term at this point of T instead of the origin.
  std::optional<Vector> prox_center;

  void validate() const {
    detail::require(epsilon > 0.0, "epsilon must be positive");
    detail::require(block >= 1, "a-posteriori block length must be >= 1");
    detail::require(max_iterations >= 1, "max_iterations must be >= 1");
  }
};

struct Certificate {
  double dual_value = 0.0;             ///< F(z_hat), lower bound on J*
  double primal_value = 0.0;           ///< D(mu_hat||nu) (+ linear cost)
  double feasibility_distance = 0.0;   ///< d(A mu_hat, T)
  double posterior_gap = 0.0;          ///< upper - dual_value
  double upper_bound = 0.0;            ///< primal_value + (C/delta) d
  double apriori_feasibility_bound = std::numeric_limits<double>::quiet_NaN();  ///< 2 eps delta / C
  long iterations = 0;
  bool certified = false;
};

struct TraceRow {
  long k = 0;
  double F_eta = 0.0;
  double F = 0.0;
  double grad_norm = 0.0;
  double feas_dist = 0.0;
};

struct SolveResult {
  Vector z_hat;
  GridMeasure measure;
  Vector moments;
  Certificate certificate;
  std::vector<TraceRow> trace;
  SmoothingParams eta;
  double lipschitz = 0.0;
  IterationCounts counts;
};

/// Bracket [F(z_hat), D(mu_hat||nu) + (C/delta) d(A mu_hat, T)].
inline Certificate posterior_certificate(const GridMeasure& mu_hat, const Vector& z_hat, const SlaterData& slater,
                                         const GibbsModel& model, const TargetSet& target) {
  Certificate c;
  const auto [primal, moments] = primal_objective(mu_hat, model);
  c.dual_value = dual_value(z_hat, model, target);
  c.primal_value = primal;
  c.feasibility_distance = target.distance(moments);
  c.upper_bound = primal + slater.C / slater.delta * c.feasibility_distance;
  c.posterior_gap = c.upper_bound - c.dual_value;
  c.certified = true;
  return c;
}

/// Certificate without Slater data: the penalty term is unavailable.
inline Certificate plain_certificate(const GridMeasure& mu_hat, const Vector& z_hat, const GibbsModel& model,
                                     const TargetSet& target) {
  Certificate c;
  const auto [primal, moments] = primal_objective(mu_hat, model);
  c.dual_value = dual_value(z_hat, model, target);
  c.primal_value = primal;
  c.feasibility_distance = target.distance(moments);
  c.upper_bound = std::numeric_limits<double>::quiet_NaN();
  c.posterior_gap = std::numeric_limits<double>::quiet_NaN();
  c.certified = false;
  return c;
}

/// Optional per-step callback (k, w_k, evaluation at w_k, y_{k+1}).
using StepObserver = std::function<void(long, const Vector&, const DualEvaluation&, const Vector&)>;

/// Accelerated ascent on F_eta:
///   y+ = w + grad F_eta(w) / L,  w+ = y+ + q (y+ - y),  q = (sqrt L - sqrt eta2)/(sqrt L + sqrt eta2).
/// With Slater data and no eta override, eta and N(eps) follow from eps.
inline SolveResult fast_gradient_solve(const GibbsModel& model, const TargetSet& target, const SolverConfig& config,
                                  const std::optional<SlaterData>& slater = std::nullopt,
                                  const StepObserver& observer = nullptr) {
  config.validate();
  detail::require(target.dimension() == model.dimension(), "target set and feature dimensions differ");
  SolveResult out;
  if (config.eta_override) {
    out.eta = *config.eta_override;
  } else {
    detail::require(slater.has_value(), "smoothing parameters need either Slater data or an explicit eta");
    out.eta = smoothing_for_accuracy(config.epsilon, *slater, target, config.diameter,
                                     config.prox_center.value_or(Vector()));
  }
  out.eta.validate();
  const double L = lipschitz_constant(out.eta, model.norm_bound);
  out.lipschitz = L;

  long budget = config.max_iterations;
  bool budget_capped = false;
  if (slater) {
    out.counts = apriori_iterations(config.epsilon, *slater, model.norm_bound, target, config.diameter,
                                    config.prox_center.value_or(Vector()));
    if (config.stopping == Stopping::apriori) {
      if (out.counts.n > config.max_iterations) {
        budget_capped = true;
      } else {
        budget = std::max<long>(out.counts.n, 1);
      }
    }
  } else if (config.stopping == Stopping::apriori || config.stopping == Stopping::aposteriori) {
    // uncertified: without Slater data both rules degrade to a fixed budget
    budget = config.max_iterations;
  }

  const double sl = std::sqrt(L);
  const double se = std::sqrt(out.eta.eta2);
  const double momentum = (sl - se) / (sl + se);
  const Index m = model.dimension();
  Vector y = config.warm_start ? *config.warm_start : Vector::Zero(m);
  detail::require(y.size() == m, "warm start has the wrong dimension");
  Vector w = y;

  bool stopped_by_rule = config.stopping == Stopping::apriori && !budget_capped;
  long k = 0;
  for (; k < budget; ++k) {
    const DualEvaluation ev = smoothed_dual(w, out.eta, model, target);
    if (config.stopping == Stopping::gradient_norm && ev.gradient.norm() <= config.gradient_tolerance) {
      y = w;
      stopped_by_rule = true;
      break;
    }
    const Vector y_next = w + ev.gradient / L;
    if (observer) observer(k, w, ev, y_next);
    w = y_next + momentum * (y_next - y);
    y = y_next;
    if (config.record_trace) {
      TraceRow row;
      row.k = k + 1;
      const DualEvaluation at_y = smoothed_dual(y, out.eta, model, target);
      row.F_eta = at_y.value;
      row.F = dual_value(y, model, target);
      row.grad_norm = at_y.gradient.norm();
      row.feas_dist = target.distance(at_y.moments);
      out.trace.push_back(row);
    }
    if (config.stopping == Stopping::aposteriori && slater && (k + 1) % config.block == 0) {
      const GibbsResult g = gibbs_at(y, model);
      const Certificate c = posterior_certificate(g.measure, y, *slater, model, target);
      if (c.posterior_gap <= config.epsilon) {
        ++k;
        stopped_by_rule = true;
        break;
      }
    }
  }

  out.z_hat = y;
  const GibbsResult g = gibbs_at(y, model);
  out.measure = g.measure;
  out.moments = model.features * g.measure.probabilities();
  if (slater) {
    out.certificate = posterior_certificate(out.measure, y, *slater, model, target);
    out.certificate.apriori_feasibility_bound = 2.0 * config.epsilon * slater->delta / slater->C;
    out.certificate.certified = stopped_by_rule || config.stopping == Stopping::fixed;
  } else {
    out.certificate = plain_certificate(out.measure, y, model, target);
    out.certificate.certified = false;
  }
  out.certificate.iterations = k;
  return out;
}

/// Envelope curves from the convergence analysis checked against a trace.
struct DiagnosticsRow {
  long k = 0;
  double observed_gap = 0.0;   ///< reference value minus F(y_k)
  double gap_envelope = 0.0;   ///< 3eps/4 + 5(C + eps/2) exp(-k/2 sqrt(eta2/L))
  double grad_norm = 0.0;
  double grad_envelope = 0.0;  ///< sqrt(4L(C + eps/2)) exp(-k/2 sqrt(eta2/L)) + 2 sqrt(3) eta2 C / delta
  bool violated = false;
};

struct DiagnosticsReport {
  std::vector<DiagnosticsRow> rows;
  long violations = 0;
};

/// reference_value defaults to the best dual value in the trace, which never
/// exceeds J* and so can only under-report the gap.
inline DiagnosticsReport diagnostics_appendix(const std::vector<TraceRow>& trace, const SlaterData& slater,
                                              const SmoothingParams& eta, double lipschitz, double epsilon,
                                              std::optional<double> reference_value = std::nullopt,
                                              double slack = 1e-9) {
  detail::require(!trace.empty(), "diagnostics need a non-empty trace");
  slater.validate();
  double ref = -std::numeric_limits<double>::infinity();
  if (reference_value) {
    ref = *reference_value;
  } else {
    for (const auto& r : trace) ref = std::max(ref, r.F);
  }
  const double rate = 0.5 * std::sqrt(eta.eta2 / lipschitz);
  DiagnosticsReport rep;
  for (const auto& r : trace) {
    DiagnosticsRow d;
    d.k = r.k;
    const double decay = std::exp(-static_cast<double>(r.k) * rate);
    d.observed_gap = ref - r.F;
    d.gap_envelope = 0.75 * epsilon + 5.0 * (slater.C + 0.5 * epsilon) * decay;
    d.grad_norm = r.grad_norm;
    d.grad_envelope = std::sqrt(4.0 * lipschitz * (slater.C + 0.5 * epsilon)) * decay +
                      2.0 * std::sqrt(3.0) * eta.eta2 * slater.C / slater.delta;
    d.violated = d.observed_gap > d.gap_envelope + slack || d.grad_norm > d.grad_envelope + slack;
    if (d.violated) ++rep.violations;
    rep.rows.push_back(d);
  }
  return rep;
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "# F_eta and F in bits; feas_dist is the Euclidean distance of the moments to T\n";
  os << "k,F_eta,F,grad_norm,feas_dist\n";
  os.precision(12);
  for (const auto& r : trace) {
    os << r.k << ',' << r.F_eta << ',' << r.F << ',' << r.grad_norm << ',' << r.feas_dist << '\n';
  }
}

}  // namespace maxent
