#pragma once

// Gibbs minimizer, dual function and its smoothed version.
//
// Everything is expressed on a finite node set: quadrature nodes for a
// continuous reference measure or atoms for a discrete one. Densities,
// entropies and log-partition values are in bits.

#include <Eigen/Dense>

#include <cmath>
#include <utility>

#include "maxent/errors.hpp"
#include "maxent/integration.hpp"
#include "maxent/parallel.hpp"
#include "maxent/problem.hpp"

namespace maxent {

/// Probability measure on a node set: mass_j = weights_j * 2^{log2_density_j}.
struct GridMeasure {
  Vector nodes;
  Vector weights;
  Vector log2_density;

  Vector probabilities() const {
    return weights.cwiseProduct(log2_density.unaryExpr([](double g) { return std::exp2(g); }));
  }
  double total_mass() const { return pairwise_sum(probabilities()); }
  /// D(mu || nu) in bits.
  double relative_entropy() const { return pairwise_sum(Vector(probabilities().cwiseProduct(log2_density))); }
};

/// Node set, reference weights and feature matrix defining a family of Gibbs
/// measures mu_z with d mu_z / d nu proportional to 2^{-cost - <z, f>}.
struct GibbsModel {
  Vector nodes;
  Vector weights;       ///< reference mass per node, sums to 1
  Matrix features;      ///< M x n, column j is f(node_j)
  Vector cost;          ///< linear cost per node, empty means zero
  double norm_bound = 0.0;  ///< upper bound on sup_j ||f(node_j)||_2 used in the Lipschitz constant

  Index dimension() const { return features.rows(); }
  Index size() const { return weights.size(); }

  /// Monomial features x^1..x^M against the problem's reference measure.
  static GibbsModel from_problem(const MomentProblem& problem, const QuadratureRule& rule) {
    GibbsModel m;
    const Index order = problem.order();
    if (problem.reference().kind() == ReferenceMeasure::Kind::discrete) {
      m.nodes = problem.reference().atoms();
      m.weights = problem.reference().weights();
    } else {
      detail::require(rule.size() >= 2, "degenerate quadrature rule");
      m.nodes = rule.nodes;
      // uniform reference: Lebesgue weights divided by the interval length
      m.weights = rule.weights / problem.support().length();
    }
    m.features = monomial_features(m.nodes, order);
    m.norm_bound = operator_norm_bound(problem);
    return m;
  }

  /// Arbitrary features against a discrete reference.
  static GibbsModel from_features(Vector weights, Matrix features, Vector nodes = Vector()) {
    detail::require(features.cols() == weights.size(), "feature matrix columns must match the reference size");
    detail::require((weights.array() > 0.0).all(), "reference weights must be strictly positive");
    GibbsModel m;
    m.weights = std::move(weights);
    m.features = std::move(features);
    m.nodes = nodes.size() == m.weights.size() ? std::move(nodes) : Vector::LinSpaced(m.weights.size(), 0.0,
                                                                                         m.weights.size() - 1.0);
    m.norm_bound = m.features.colwise().norm().maxCoeff();
    return m;
  }

  static Matrix monomial_features(const Vector& x, Index order) {
    Matrix f(order, x.size());
    Vector power = Vector::Ones(x.size());
    for (Index i = 0; i < order; ++i) {
      power = power.cwiseProduct(x);
      f.row(i) = power.transpose();
    }
    return f;
  }
};

/// Gibbs measure together with the optimal value of min_mu D(mu||nu) - <mu, c>.
struct GibbsResult {
  GridMeasure measure;
  double log2_partition = 0.0;  ///< log2 of the integral of 2^c against nu
  double value = 0.0;           ///< -log2_partition
};

namespace detail {

inline GibbsResult gibbs_from_exponent(const Vector& exponent, const Vector& nodes, const Vector& weights) {
  detail::require(weights.size() >= 1 && exponent.size() == weights.size(), "degenerate rule for the Gibbs measure");
  detail::require(exponent.allFinite(), "Gibbs exponent must be finite at every node");
  const double m = exponent.maxCoeff();
  Vector scaled(exponent.size());
  parallel_for(exponent.size(), [&](long j) { scaled(j) = weights(j) * std::exp2(exponent(j) - m); });
  const double log2_sum = std::log2(pairwise_sum(scaled));
  const double log2_z = m + log2_sum;
  GibbsResult r;
  r.measure.nodes = nodes;
  r.measure.weights = weights;
  // subtract the max before the sum so large exponents do not cancel
  r.measure.log2_density = (exponent.array() - m) - log2_sum;
  r.log2_partition = log2_z;
  r.value = -log2_z;
  return r;
}

}  // namespace detail

/// Exponent 2^{...} of the Gibbs density for dual point z (before normalization).
inline Vector gibbs_exponent(const Vector& z, const GibbsModel& model) {
  detail::require(z.size() == model.dimension(), "dual point dimension mismatch");
  Vector g = -(model.features.transpose() * z);
  if (model.cost.size() > 0) g -= model.cost;
  return g;
}

/// mu* with d mu*/d nu = 2^c / int 2^c d nu, for c given at the rule nodes.
inline GibbsResult gibbs_measure(const Vector& c_at_nodes, const QuadratureRule& rule,
                                 const SupportInterval& support) {
  detail::require(rule.size() >= 2, "degenerate quadrature rule");
  return detail::gibbs_from_exponent(c_at_nodes, rule.nodes, rule.weights / support.length());
}

inline GibbsResult gibbs_measure(const Vector& c_at_nodes, const MomentProblem& problem,
                                 const QuadratureRule& rule) {
  const GibbsModel m = GibbsModel::from_problem(problem, rule);
  return detail::gibbs_from_exponent(c_at_nodes, m.nodes, m.weights);
}

/// Gibbs measure mu_z of the model at dual point z.
inline GibbsResult gibbs_at(const Vector& z, const GibbsModel& model) {
  return detail::gibbs_from_exponent(gibbs_exponent(z, model), model.nodes, model.weights);
}

/// Feature expectations under mu_z.
inline Vector moments_of_gibbs(const Vector& z, const GibbsModel& model) {
  const GibbsResult g = gibbs_at(z, model);
  return model.features * g.measure.probabilities();
}

inline Vector moments_of_gibbs(const Vector& z, const MomentProblem& problem, const QuadratureRule& rule) {
  return moments_of_gibbs(z, GibbsModel::from_problem(problem, rule));
}

/// Primal objective D(mu||nu) + <mu, cost> and the feature moments of mu.
inline std::pair<double, Vector> primal_objective(const GridMeasure& mu, const GibbsModel& model) {
  const Vector p = mu.probabilities();
  double value = pairwise_sum(Vector(p.cwiseProduct(mu.log2_density)));
  if (model.cost.size() > 0) value += pairwise_sum(Vector(p.cwiseProduct(model.cost)));
  return {value, model.features * p};
}

/// F(z) = -sigma_T(z) - log2 int 2^{-cost - A*z} d nu.
inline double dual_value(const Vector& z, const GibbsModel& model, const TargetSet& target) {
  const Vector g = gibbs_exponent(z, model);
  const double m = g.maxCoeff();
  Vector scaled(g.size());
  parallel_for(g.size(), [&](long j) { scaled(j) = model.weights(j) * std::exp2(g(j) - m); });
  return -target.support(z) - (m + std::log2(pairwise_sum(scaled)));
}

inline double dual_value(const Vector& z, const MomentProblem& problem, const TargetSet& target,
                         const QuadratureRule& rule) {
  return dual_value(z, GibbsModel::from_problem(problem, rule), target);
}

struct SmoothingParams {
  double eta1 = 1e-3;
  double eta2 = 1e-3;
  Vector prox_center;  ///< center of the prox term on T; empty means the origin

  void validate() const {
    detail::require(eta1 > 0.0 && eta2 > 0.0, "smoothing parameters must be strictly positive");
  }
};

struct DualEvaluation {
  double value = 0.0;
  Vector gradient;
  Vector x_star;
  Vector moments;
  double log2_partition = 0.0;
};

/// F_eta(z) and its gradient -x*_z + A mu_z - eta2 z.
inline DualEvaluation smoothed_dual(const Vector& z, const SmoothingParams& eta, const GibbsModel& model,
                                    const TargetSet& target) {
  eta.validate();
  const Vector g = gibbs_exponent(z, model);
  const double m = g.maxCoeff();
  Vector scaled(g.size());
  parallel_for(g.size(), [&](long j) { scaled(j) = model.weights(j) * std::exp2(g(j) - m); });
  const double z_sum = pairwise_sum(scaled);
  DualEvaluation e;
  e.log2_partition = m + std::log2(z_sum);
  e.moments = model.features * (scaled / z_sum);
  if (eta.prox_center.size() > 0) {
    e.x_star = target.project(eta.prox_center + z / eta.eta1);
    e.value = -(e.x_star.dot(z) - 0.5 * eta.eta1 * (e.x_star - eta.prox_center).squaredNorm());
  } else {
    e.x_star = target.project(z / eta.eta1);
    e.value = -(e.x_star.dot(z) - 0.5 * eta.eta1 * e.x_star.squaredNorm());
  }
  e.value += -e.log2_partition - 0.5 * eta.eta2 * z.squaredNorm();
  e.gradient = -e.x_star + e.moments - eta.eta2 * z;
  return e;
}

inline DualEvaluation smoothed_dual(const Vector& z, const SmoothingParams& eta, const MomentProblem& problem,
                                    const TargetSet& target, const QuadratureRule& rule) {
  return smoothed_dual(z, eta, GibbsModel::from_problem(problem, rule), target);
}

/// Lipschitz constant 1/eta1 + ||A||^2 + eta2 of the smoothed dual gradient.
inline double lipschitz_constant(const SmoothingParams& eta, double norm_bound) {
  return 1.0 / eta.eta1 + norm_bound * norm_bound + eta.eta2;
}

}  // namespace maxent
