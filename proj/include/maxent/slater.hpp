#pragma once

// Strictly feasible polynomial density for a moment box and its constants.
//
// The density p(s) = sum_j alpha_j s^{j-1} on [0,1] matches the observed
// moments exactly; positivity is enforced on a grid by maximizing the smallest
// grid value, then certified between nodes with Markov's derivative bound.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>

#include "maxent/errors.hpp"
#include "maxent/fast_gradient.hpp"
#include "maxent/integration.hpp"
#include "maxent/linear_program.hpp"
#include "maxent/problem.hpp"

namespace maxent {

struct PolynomialDensity {
  Vector coefficients;  ///< alpha_1..alpha_r, ascending powers of s on [0,1]
  SupportInterval support{0.0, 1.0};

  Index degree() const { return coefficients.size(); }

  /// Density on [0,1] in the normalized variable.
  double eval_unit(double s) const {
    double v = 0.0;
    for (Index j = coefficients.size(); j-- > 0;) v = v * s + coefficients(j);
    return v;
  }
  /// Density against Lebesgue measure on the original support.
  double operator()(double x) const { return eval_unit((x - support.lower) / support.length()) / support.length(); }
};

struct SlaterResult {
  PolynomialDensity density;
  double margin = 0.0;          ///< min of p over the construction grid
  bool positivity_certified = false;
  double C = 0.0;               ///< D(mu0 || nu) in bits, nu uniform
  double delta = 0.0;           ///< min_i u_i
  GridMeasure measure;          ///< mu0 on the quadrature nodes

  bool usable() const { return positivity_certified && C > 0.0 && delta > 0.0; }
  SlaterData data() const {
    SlaterData s;
    s.C = C;
    s.delta = delta;
    s.slater_measure = measure;
    return s;
  }
};

/// Entry (i, j) = 1/(i+j-1), i = 1..M+1, j = 1..r.
inline Matrix hilbert_moment_matrix(Index r, Index order) {
  detail::require(r >= 1 && order >= 1, "hilbert_moment_matrix needs r >= 1 and M >= 1");
  Matrix a(order + 1, r);
  for (Index i = 0; i <= order; ++i)
    for (Index j = 0; j < r; ++j) a(i, j) = 1.0 / static_cast<double>(i + j + 1);
  return a;
}

/// Moments of the affinely rescaled variable s = (x - a)/(b - a).
inline Vector unit_interval_moments(const SupportInterval& support, const Vector& raw) {
  const Index m = raw.size();
  const double a = support.lower;
  const double len = support.length();
  // E[x^k] with E[x^0] = 1
  Vector ex(m + 1);
  ex(0) = 1.0;
  ex.tail(m) = raw;
  Vector out(m);
  for (Index i = 1; i <= m; ++i) {
    double acc = 0.0;
    double binom = 1.0;
    for (Index k = 0; k <= i; ++k) {
      if (k > 0) binom = binom * static_cast<double>(i - k + 1) / static_cast<double>(k);
      acc += binom * ex(k) * std::pow(-a, static_cast<double>(i - k));
    }
    out(i - 1) = acc / std::pow(len, static_cast<double>(i));
  }
  return out;
}

struct SlaterOptions {
  Index grid_points = 2048;
  Index quadrature_nodes = 2049;
  double equality_tolerance = 1e-10;
};

inline SlaterResult find_polynomial_slater(const MomentProblem& problem, Index r,
                                           const SlaterOptions& opt = SlaterOptions{}) {
  detail::require(problem.reference().kind() == ReferenceMeasure::Kind::uniform,
                  "polynomial Slater construction needs the uniform reference measure");
  detail::require(r >= 1, "polynomial degree r must be >= 1");
  detail::require(opt.grid_points >= 2, "Slater grid needs at least 2 points");
  const Index order = problem.order();
  const Matrix A = hilbert_moment_matrix(r, order);
  Vector beta(order + 1);
  beta(0) = 1.0;
  beta.tail(order) = unit_interval_moments(problem.support(), problem.observed());

  // alpha = alpha_p + N w
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector alpha_p = svd.solve(beta);
  const double residual = (A * alpha_p - beta).norm();
  if (residual > opt.equality_tolerance * std::max(1.0, beta.norm())) {
    throw InfeasibleError("moment equations have no polynomial solution of degree r=" + std::to_string(r) +
                          " (residual " + std::to_string(residual) + "); increase r");
  }
  const double sv_tol = 1e-12 * svd.singularValues()(0);
  Index rank = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > sv_tol) ++rank;
  const Matrix N = svd.matrixV().rightCols(r - rank);

  // grid values: V alpha with V_gj = s_g^{j-1}
  const Index g = opt.grid_points;
  const Vector grid = Vector::LinSpaced(g, 0.0, 1.0);
  Matrix V(g, r);
  for (Index i = 0; i < g; ++i) {
    double p = 1.0;
    for (Index j = 0; j < r; ++j) {
      V(i, j) = p;
      p *= grid(i);
    }
  }
  // max t s.t. -(V N) w + t <= V alpha_p  (variables (w, t) free), solved
  // through its standard-form dual: min h^T lam, G^T lam = e_t, lam >= 0
  const Index k = N.cols();
  Matrix G(g, k + 1);
  G.leftCols(k) = -(V * N);
  G.col(k).setOnes();
  const Vector h = V * alpha_p;
  Vector e = Vector::Zero(k + 1);
  e(k) = 1.0;
  const LpResult lp = solve_standard_lp(G.transpose(), e, h);
  if (lp.status != LpStatus::optimal) {
    throw InfeasibleError("grid positivity LP did not reach an optimum at r=" + std::to_string(r));
  }
  const Vector wt = lp.dual;
  SlaterResult out;
  out.density.coefficients = alpha_p + N * wt.head(k);
  out.density.support = problem.support();
  out.margin = (V * out.density.coefficients).minCoeff();

  // between nodes |p'| <= 2 n^2 ||p||_inf on [0,1], n = r-1, so every point is
  // within spacing*n^2*||p||_inf of a grid value
  const double spacing = 1.0 / static_cast<double>(g - 1);
  const double n = static_cast<double>(r - 1);
  double sup_bound = out.density.coefficients.cwiseAbs().sum();
  const double spread = spacing * n * n;
  if (spread < 1.0) sup_bound = std::min(sup_bound, (V * out.density.coefficients).cwiseAbs().maxCoeff() / (1.0 - spread));
  const double certified_floor = out.margin - spacing * n * n * sup_bound;
  out.positivity_certified = out.margin > 0.0 && certified_floor > 0.0;

  // C by quadrature on the unit interval (invariant under the affine map)
  const QuadratureRule rule = composite_rule(SupportInterval(0.0, 1.0), opt.quadrature_nodes, RuleKind::simpson);
  Vector plogp(rule.size());
  Vector log2p(rule.size());
  for (Index i = 0; i < rule.size(); ++i) {
    const double p = out.density.eval_unit(rule.nodes(i));
    log2p(i) = p > 0.0 ? std::log2(p) : -std::numeric_limits<double>::infinity();
    plogp(i) = p > 0.0 ? p * log2p(i) : 0.0;
  }
  out.C = std::max(0.0, rule.integrate(plogp));
  out.delta = problem.uncertainty().minCoeff();
  out.measure.nodes = (problem.support().lower + problem.support().length() * rule.nodes.array()).matrix();
  out.measure.weights = rule.weights;
  out.measure.log2_density = log2p;
  return out;
}

}  // namespace maxent
