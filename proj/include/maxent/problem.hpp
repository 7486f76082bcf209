#pragma once

// Problem data model: support interval, reference measure, moment problem,
// and the target set T of admissible moment vectors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "maxent/errors.hpp"

namespace maxent {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Compact interval [lower, upper] carrying the unknown measure.
struct SupportInterval {
  double lower = 0.0;
  double upper = 1.0;

  SupportInterval() = default;
  SupportInterval(double lo, double hi) : lower(lo), upper(hi) {
    detail::require(std::isfinite(lo) && std::isfinite(hi), "support bounds must be finite");
    detail::require(lo < hi, "support requires lower < upper");
  }

  double length() const { return upper - lower; }
  /// B = max |x| over the interval.
  double max_abs() const { return std::max(std::abs(lower), std::abs(upper)); }
};

/// Reference measure nu. Either uniform on the support interval or a finite
/// atomic measure with strictly positive weights.
class ReferenceMeasure {
 public:
  enum class Kind { uniform, discrete };

  static ReferenceMeasure uniform() { return ReferenceMeasure{}; }

  static ReferenceMeasure discrete(Vector atoms, Vector weights) {
    detail::require(atoms.size() == weights.size() && atoms.size() > 0,
                    "discrete reference needs matching, non-empty atoms and weights");
    detail::require((weights.array() > 0.0).all(), "discrete reference weights must be strictly positive");
    detail::require(std::abs(weights.sum() - 1.0) <= 1e-12, "discrete reference weights must sum to 1");
    ReferenceMeasure r;
    r.kind_ = Kind::discrete;
    r.atoms_ = std::move(atoms);
    r.weights_ = std::move(weights);
    return r;
  }

  Kind kind() const { return kind_; }
  const Vector& atoms() const { return atoms_; }
  const Vector& weights() const { return weights_; }

 private:
  Kind kind_ = Kind::uniform;
  Vector atoms_;
  Vector weights_;
};

/// Axis-aligned box: center +/- radius per coordinate.
struct BoxSet {
  Vector center;
  Vector radius;
};

/// Euclidean ball.
struct BallSet {
  Vector center;
  double radius = 0.0;
};

/// {x in R^2 : x1 >= lower_first, x2 <= upper_second, x1^2 <= x2}.
struct BoxParabolaSet {
  double lower_first = 0.0;
  double upper_second = 1.0;
};

/// Options for the alternating-projection routine used by box-parabola sets.
namespace detail {

/// Closest point to (a, b) on {x1^2 <= x2}.
inline Eigen::Vector2d project_parabola_epigraph(double a, double b) {
  if (a * a <= b) return {a, b};
  // The nearest boundary point (t, t^2) solves 2t^3 + (1 - 2b) t - a = 0.
  // For a != 0 the root lies strictly between 0 and a, and the cubic is convex
  // on that side of the origin, so a safeguarded Newton iteration is exact.
  if (a == 0.0) return {0.0, 0.0};
  const double sign = a > 0 ? 1.0 : -1.0;
  const double target = std::abs(a);
  auto f = [&](double t) { return 2.0 * t * t * t + (1.0 - 2.0 * b) * t - target; };
  double lo = 0.0;
  double hi = target;
  double t = target;
  for (int it = 0; it < 200; ++it) {
    const double ft = f(t);
    if (ft > 0) {
      hi = t;
    } else {
      lo = t;
    }
    const double df = 6.0 * t * t + (1.0 - 2.0 * b);
    double next = df > 0 ? t - ft / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::max(1.0, target)) {
      t = next;
      break;
    }
    t = next;
  }
  t *= sign;
  return {t, t * t};
}

}  // namespace detail

/// Closed convex target set T for the moment vector.
class TargetSet {
 public:
  using Shape = std::variant<BoxSet, BallSet, BoxParabolaSet>;

  static TargetSet box(Vector center, Vector radius) {
    detail::require(center.size() == radius.size() && center.size() > 0, "box center/radius dimension mismatch");
    detail::require((radius.array() >= 0.0).all(), "box radii must be nonnegative");
    return TargetSet(BoxSet{std::move(center), std::move(radius)});
  }

  /// Box given by per-coordinate bounds lower <= x <= upper.
  static TargetSet box_from_bounds(const Vector& lower, const Vector& upper) {
    detail::require(lower.size() == upper.size(), "box bounds dimension mismatch");
    detail::require((lower.array() <= upper.array()).all(), "box requires lower <= upper");
    return box(0.5 * (lower + upper), 0.5 * (upper - lower));
  }

  static TargetSet ball(Vector center, double radius) {
    detail::require(center.size() > 0, "ball needs a nonempty center");
    detail::require(radius >= 0.0, "ball radius must be nonnegative");
    return TargetSet(BallSet{std::move(center), radius});
  }

  static TargetSet box_parabola(double lower_first, double upper_second) {
    detail::require(lower_first * lower_first < upper_second || lower_first < 0.0,
                    "box-parabola requires lower_first^2 < upper_second");
    detail::require(upper_second > 0.0, "box-parabola requires upper_second > 0");
    return TargetSet(BoxParabolaSet{lower_first, upper_second});
  }

  const Shape& shape() const { return shape_; }

  Index dimension() const {
    return std::visit(
        [](const auto& s) -> Index {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BoxParabolaSet>) {
            return 2;
          } else {
            return s.center.size();
          }
        },
        shape_);
  }


  /// sigma_T(z) = max_{x in T} <x, z>.
  double support(const Vector& z) const {
    check_dimension(z);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BoxSet>) {
            return s.center.dot(z) + s.radius.dot(z.cwiseAbs());
          } else if constexpr (std::is_same_v<S, BallSet>) {
            return s.center.dot(z) + s.radius * z.norm();
          } else {
            return box_parabola_support(s, z);
          }
        },
        shape_);
  }

  /// Euclidean projection pi_T(y).
  Vector project(const Vector& y) const {
    check_dimension(y);
    return std::visit(
        [&](const auto& s) -> Vector {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BoxSet>) {
            return y.cwiseMax(s.center - s.radius).cwiseMin(s.center + s.radius);
          } else if constexpr (std::is_same_v<S, BallSet>) {
            const Vector d = y - s.center;
            const double n = d.norm();
            if (n <= s.radius) return y;
            return s.center + (s.radius / n) * d;
          } else {
            return box_parabola_project(s, y);
          }
        },
        shape_);
  }

  /// d(x, T) = ||x - pi_T(x)||_2.
  double distance(const Vector& x) const { return (x - project(x)).norm(); }

  /// max_{x in T} ||x||_2.
  double max_norm() const {
    return std::visit(
        [](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BoxSet>) {
            // attained at the vertex farthest from the origin
            return ((s.center.cwiseAbs() + s.radius)).norm();
          } else if constexpr (std::is_same_v<S, BallSet>) {
            return s.center.norm() + s.radius;
          } else {
            const auto [lo, hi] = box_parabola_first_range(s);
            const double x1 = std::max(std::abs(lo), std::abs(hi));
            return std::hypot(x1, s.upper_second);
          }
        },
        shape_);
  }

  /// max_{x in T} ||x - c||_2.
  double max_distance_from(const Vector& c) const {
    check_dimension(c);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BoxSet>) {
            return ((s.center - c).cwiseAbs() + s.radius).norm();
          } else if constexpr (std::is_same_v<S, BallSet>) {
            return (s.center - c).norm() + s.radius;
          } else {
            // convex function over a compact set: attained on the boundary;
            // scan the top edge and the parabola arc
            const auto [lo, hi] = box_parabola_first_range(s);
            double best = 0.0;
            const int n = 4096;
            for (int i = 0; i <= n; ++i) {
              const double t = lo + (hi - lo) * i / n;
              best = std::max(best, std::hypot(t - c(0), s.upper_second - c(1)));
              best = std::max(best, std::hypot(t - c(0), t * t - c(1)));
            }
            return best;
          }
        },
        shape_);
  }

  /// Center used for prox terms: box or ball center; for box-parabola the
  /// midpoint of the vertical segment above lower_first clipped to the set.
  Vector center() const {
    return std::visit(
        [&](const auto& s) -> Vector {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BoxParabolaSet>) {
            const auto [lo, hi] = box_parabola_first_range(s);
            const double x1 = 0.5 * (lo + hi);
            Vector v(2);
            v << x1, 0.5 * (x1 * x1 + s.upper_second);
            return v;
          } else {
            return s.center;
          }
        },
        shape_);
  }

  /// Largest r with B(x, r) inside T; negative when x is outside.
  /// Exact for boxes and balls; for box-parabola it is the distance to the
  /// nearest boundary piece.
  double interior_margin(const Vector& x) const {
    check_dimension(x);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BoxSet>) {
            return (s.radius.array() - (x - s.center).array().abs()).minCoeff();
          } else if constexpr (std::is_same_v<S, BallSet>) {
            return s.radius - (x - s.center).norm();
          } else {
            const double to_first = x(0) - s.lower_first;
            const double to_second = s.upper_second - x(1);
            const Eigen::Vector2d p = detail::project_parabola_epigraph(x(0), x(1));
            double to_parabola = 0.0;
            if (x(0) * x(0) <= x(1)) {
              // distance from an interior point to the parabola curve
              to_parabola = distance_to_parabola_curve(x(0), x(1));
            } else {
              to_parabola = -(x - Vector(p)).norm();
            }
            return std::min({to_first, to_second, to_parabola});
          }
        },
        shape_);
  }

 private:
  explicit TargetSet(Shape s) : shape_(std::move(s)) {}

  void check_dimension(const Vector& v) const {
    if (v.size() != dimension()) {
      throw InvalidArgument("dimension mismatch: target set has dimension " + std::to_string(dimension()) +
                            ", got " + std::to_string(v.size()));
    }
  }

  static std::pair<double, double> box_parabola_first_range(const BoxParabolaSet& s) {
    const double root = std::sqrt(s.upper_second);
    return {std::max(s.lower_first, -root), root};
  }

  static double box_parabola_support(const BoxParabolaSet& s, const Vector& z) {
    const auto [lo, hi] = box_parabola_first_range(s);
    if (z(1) >= 0.0) {
      // x2 = upper_second on the top face; x1 at an endpoint
      return std::max(z(0) * lo, z(0) * hi) + z(1) * s.upper_second;
    }
    // x2 = x1^2 on the parabola face; concave quadratic in x1
    const double vertex = std::clamp(-z(0) / (2.0 * z(1)), lo, hi);
    return z(0) * vertex + z(1) * vertex * vertex;
  }

  /// Stationary points t of (t-a)^2 + (t^2-b)^2, i.e. real roots of
  /// 2t^3 + (1-2b)t - a = 0, polished by Newton steps.
  static std::vector<double> parabola_stationary_points(double a, double b) {
    std::vector<double> roots;
    const double p = (1.0 - 2.0 * b) / 2.0;
    const double q = -a / 2.0;
    // depressed cubic t^3 + p t + q = 0
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0) {
      const double sq = std::sqrt(disc);
      roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq));
    } else {
      const double r = std::sqrt(-p / 3.0);
      const double phi = std::acos(std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0));
      for (int k = 0; k < 3; ++k) roots.push_back(2.0 * r * std::cos((phi - 2.0 * M_PI * k) / 3.0));
    }
    for (double& t : roots) {
      for (int it = 0; it < 4; ++it) {
        const double df = 3.0 * t * t + p;
        if (df == 0.0) break;
        const double next = t - (t * t * t + p * t + q) / df;
        if (!std::isfinite(next)) break;
        t = next;
      }
    }
    return roots;
  }

  static double distance_to_parabola_curve(double a, double b) {
    double best = std::numeric_limits<double>::infinity();
    for (double t : parabola_stationary_points(a, b)) best = std::min(best, std::hypot(t - a, t * t - b));
    return best;
  }

  // Outside points project onto the boundary, which is the union of the
  // left segment, the top segment and a parabola arc; take the nearest
  // candidate over the three pieces.
  Vector box_parabola_project(const BoxParabolaSet& s, const Vector& y) const {
    const double a = y(0);
    const double b = y(1);
    if (a >= s.lower_first && b <= s.upper_second && a * a <= b) return y;
    const auto [lo, hi] = box_parabola_first_range(s);
    Eigen::Vector2d best(hi, s.upper_second);
    double best_d = std::numeric_limits<double>::infinity();
    auto consider = [&](double x1, double x2) {
      const double d = std::hypot(x1 - a, x2 - b);
      if (d < best_d) {
        best_d = d;
        best = {x1, x2};
      }
    };
    if (s.lower_first > -hi) consider(s.lower_first, std::clamp(b, s.lower_first * s.lower_first, s.upper_second));
    consider(std::clamp(a, lo, hi), s.upper_second);
    consider(lo, lo * lo);
    for (double t : parabola_stationary_points(a, b)) {
      const double tc = std::clamp(t, lo, hi);
      consider(tc, tc * tc);
    }
    return Vector(best);
  }

  Shape shape_;
};

inline double support_function(const TargetSet& target, const Vector& z) { return target.support(z); }
inline Vector project_onto_target(const TargetSet& target, const Vector& y) { return target.project(y); }
inline double distance_to_target(const TargetSet& target, const Vector& x) { return target.distance(x); }

/// Truncated moment problem: observed y_i = <mu, x^i> + u_i with |u_i| <= radius_i.
class MomentProblem {
 public:
  MomentProblem(SupportInterval support, Vector observed, Vector uncertainty,
                ReferenceMeasure reference = ReferenceMeasure::uniform())
      : support_(support),
        observed_(std::move(observed)),
        uncertainty_(std::move(uncertainty)),
        reference_(std::move(reference)) {
    detail::require(observed_.size() >= 1, "moment order must be at least 1");
    detail::require(uncertainty_.size() == observed_.size(), "uncertainty radii must match the moment order");
    detail::require((uncertainty_.array() >= 0.0).all(), "uncertainty radii must be nonnegative");
    if (reference_.kind() == ReferenceMeasure::Kind::discrete) {
      const auto& a = reference_.atoms();
      detail::require((a.array() >= support_.lower).all() && (a.array() <= support_.upper).all(),
                      "reference atoms must lie in the support interval");
    }
  }

  /// Same radius u for every moment.
  static MomentProblem with_uniform_radius(SupportInterval support, Vector observed, double radius,
                                           ReferenceMeasure reference = ReferenceMeasure::uniform()) {
    Vector u = Vector::Constant(observed.size(), radius);
    return MomentProblem(support, std::move(observed), std::move(u), std::move(reference));
  }

  const SupportInterval& support() const { return support_; }
  Index order() const { return observed_.size(); }
  const Vector& observed() const { return observed_; }
  const Vector& uncertainty() const { return uncertainty_; }
  const ReferenceMeasure& reference() const { return reference_; }

  /// T = x_i [y_i - u_i, y_i + u_i].
  TargetSet target() const { return TargetSet::box(observed_, uncertainty_); }

 private:
  SupportInterval support_;
  Vector observed_;
  Vector uncertainty_;
  ReferenceMeasure reference_;
};

/// Bound ||A|| <= sum_{i=1..M} B^i used in the Lipschitz constant.
inline double operator_norm_bound(const MomentProblem& problem) {
  const double b = problem.support().max_abs();
  double sum = 0.0;
  double power = 1.0;
  for (Index i = 0; i < problem.order(); ++i) {
    power *= b;
    sum += power;
  }
  return sum;
}

}  // namespace maxent
