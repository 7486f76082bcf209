#pragma once

// Finite state spaces: exact sums replace quadrature.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <utility>

#include "maxent/errors.hpp"
#include "maxent/fast_gradient.hpp"
#include "maxent/gibbs.hpp"
#include "maxent/problem.hpp"

namespace maxent {

struct DiscreteProblem {
  Vector states;
  Vector reference;  ///< strictly positive, sums to 1
  Matrix features;   ///< M x N
  TargetSet target;

  DiscreteProblem(Vector states_, Vector reference_, Matrix features_, TargetSet target_)
      : states(std::move(states_)),
        reference(std::move(reference_)),
        features(std::move(features_)),
        target(std::move(target_)) {
    detail::require(reference.size() >= 1, "discrete problem needs at least one state");
    detail::require((reference.array() > 0.0).all(),
                    "reference weights must be strictly positive (zero weight breaks full support)");
    detail::require(std::abs(reference.sum() - 1.0) <= 1e-12, "reference weights must sum to 1");
    detail::require(features.cols() == reference.size(), "feature matrix must have one column per state");
    detail::require(states.size() == reference.size(), "state values must match the reference size");
    detail::require(target.dimension() == features.rows(), "target dimension must equal the feature count");
  }

  /// Rows states^1..states^M.
  static DiscreteProblem monomial(Vector states, Vector reference, Index order, TargetSet target) {
    Matrix f = GibbsModel::monomial_features(states, order);
    return DiscreteProblem(std::move(states), std::move(reference), std::move(f), std::move(target));
  }

  Index size() const { return reference.size(); }
  GibbsModel model() const { return GibbsModel::from_features(reference, features, states); }
  /// C = max_i log2(1/nu_i), an upper bound on D(mu||nu) over the simplex.
  double entropy_bound() const { return -std::log2(reference.minCoeff()); }
};

/// ||z*|| <= (1/delta) max_i log2(1/nu_i).
inline double discrete_dual_bound(const DiscreteProblem& problem, double delta) {
  detail::require(delta > 0.0, "delta must be positive");
  return problem.entropy_bound() / delta;
}

/// Default delta: the smallest box radius when T is a box whose center is
/// realizable, otherwise the interior margin of the reference moments.
inline double default_discrete_delta(const DiscreteProblem& problem) {
  if (const auto* box = std::get_if<BoxSet>(&problem.target.shape())) return box->radius.minCoeff();
  return problem.target.interior_margin(problem.features * problem.reference);
}

struct DiscreteSolution {
  Vector weights;  ///< mu_hat on the states
  Vector z_hat;
  Certificate certificate;
  SolveResult run;
};

struct DiscreteOptions {
  std::optional<double> C_override;
  std::optional<double> delta;
  SolverConfig solver;
};

inline DiscreteSolution solve_discrete(const DiscreteProblem& problem, double epsilon,
                                       const DiscreteOptions& options = DiscreteOptions{}) {
  detail::require(epsilon > 0.0, "epsilon must be positive");
  SlaterData slater;
  slater.C = options.C_override.value_or(problem.entropy_bound());
  slater.delta = options.delta.value_or(default_discrete_delta(problem));
  SolverConfig cfg = options.solver;
  cfg.epsilon = epsilon;
  const GibbsModel model = problem.model();
  std::optional<SlaterData> s;
  if (slater.C > 0.0 && slater.delta > 0.0) s = slater;
  DiscreteSolution out;
  out.run = fast_gradient_solve(model, problem.target, cfg, s);
  out.weights = out.run.measure.probabilities();
  out.z_hat = out.run.z_hat;
  out.certificate = out.run.certificate;
  return out;
}

}  // namespace maxent
