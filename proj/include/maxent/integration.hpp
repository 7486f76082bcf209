#pragma once

// Quadrature rules, van der Corput points and log-domain accumulation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "maxent/errors.hpp"
#include "maxent/problem.hpp"

namespace maxent {

struct QuadratureRule {
  Vector nodes;
  Vector weights;

  Index size() const { return nodes.size(); }
  double integrate(const Vector& values) const;
};

enum class RuleKind { midpoint, simpson };

namespace detail {
inline double pairwise_sum_range(const double* v, Index n) {
  if (n <= 16) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const Index half = n / 2;
  return pairwise_sum_range(v, half) + pairwise_sum_range(v + half, n - half);
}
}  // namespace detail

/// Sum with a fixed binary tree so the result depends only on the data.
inline double pairwise_sum(const Vector& v) { return detail::pairwise_sum_range(v.data(), v.size()); }

inline double QuadratureRule::integrate(const Vector& values) const {
  detail::require(values.size() == weights.size(), "integrand does not match the rule's node count");
  return pairwise_sum(Vector(weights.cwiseProduct(values)));
}

/// Composite midpoint (n cells) or Simpson (n nodes, rounded up to odd).
inline QuadratureRule composite_rule(const SupportInterval& support, Index n, RuleKind kind) {
  detail::require(n >= 2, "composite rule needs at least 2 nodes, got " + std::to_string(n));
  const double a = support.lower;
  const double len = support.length();
  QuadratureRule rule;
  if (kind == RuleKind::midpoint) {
    const double h = len / static_cast<double>(n);
    rule.nodes.resize(n);
    for (Index i = 0; i < n; ++i) rule.nodes(i) = a + (static_cast<double>(i) + 0.5) * h;
    rule.weights = Vector::Constant(n, h);
    return rule;
  }
  if (n % 2 == 0) ++n;
  const double h = len / static_cast<double>(n - 1);
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (Index i = 0; i < n; ++i) {
    rule.nodes(i) = (i == n - 1) ? support.upper : a + static_cast<double>(i) * h;
    double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    rule.weights(i) = c * h / 3.0;
  }
  return rule;
}

namespace detail {
inline bool is_prime(long b) {
  if (b < 2) return false;
  for (long d = 2; d * d <= b; ++d)
    if (b % d == 0) return false;
  return true;
}
}  // namespace detail

/// First n radical-inverse points in the given prime base (index starts at 1).
inline Vector vdc_sequence(Index n, long base) {
  detail::require(n >= 1, "vdc_sequence needs n >= 1");
  detail::require(detail::is_prime(base), "vdc_sequence base must be prime, got " + std::to_string(base));
  Vector out(n);
  for (Index k = 0; k < n; ++k) {
    long i = static_cast<long>(k) + 1;
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
      f /= static_cast<double>(base);
      r += f * static_cast<double>(i % base);
      i /= base;
    }
    out(k) = r;
  }
  return out;
}

/// Equal-weight QMC rule on the support from n van der Corput points.
inline QuadratureRule qmc_rule(const SupportInterval& support, Index n, long base = 2) {
  QuadratureRule rule;
  rule.nodes = (support.lower + support.length() * vdc_sequence(n, base).array()).matrix();
  rule.weights = Vector::Constant(n, support.length() / static_cast<double>(n));
  return rule;
}

/// log2(sum_j w_j 2^{g_j}) with the maximum exponent factored out.
inline double log2_integral(const Vector& log2_integrand, const QuadratureRule& rule) {
  detail::require(rule.size() > 0, "log2_integral on an empty rule");
  detail::require(log2_integrand.size() == rule.size(), "integrand does not match the rule's node count");
  const double m = log2_integrand.maxCoeff();
  const Vector terms = (log2_integrand.array() - m).unaryExpr([](double g) { return std::exp2(g); }).matrix();
  return m + std::log2(rule.integrate(terms));
}

}  // namespace maxent
