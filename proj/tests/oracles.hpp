#pragma once

// Independent reference solutions used only by the tests.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct BoxMaxentSolution {
  bool found = false;
  double value = 0.0;  ///< J* = min D(mu||nu) in bits
  VectorXd z;
  VectorXd mu;
};

namespace detail {

inline double log2_partition(const VectorXd& nu, const MatrixXd& f, const VectorXd& z, VectorXd* mu) {
  VectorXd g = -(f.transpose() * z);
  const double m = g.maxCoeff();
  VectorXd p = nu.array() * (g.array() - m).unaryExpr([](double v) { return std::exp2(v); });
  const double s = p.sum();
  if (mu) *mu = p / s;
  return m + std::log2(s);
}

}  // namespace detail

/// Exact minimizer of D(mu||nu) over the simplex subject to lo <= F mu <= hi.
/// Enumerates which bound each moment sits at (3^M patterns); for every
/// pattern the equality-constrained dual is solved by damped Newton and the
/// KKT conditions are checked.
inline BoxMaxentSolution box_maxent(const VectorXd& nu, const MatrixXd& f, const VectorXd& lo, const VectorXd& hi,
                                    double kkt_tol = 1e-8) {
  const Eigen::Index m = f.rows();
  BoxMaxentSolution best;
  best.value = std::numeric_limits<double>::infinity();
  long patterns = 1;
  for (Eigen::Index i = 0; i < m; ++i) patterns *= 3;
  for (long code = 0; code < patterns; ++code) {
    std::vector<int> sgn(m);
    std::vector<Eigen::Index> active;
    long c = code;
    for (Eigen::Index i = 0; i < m; ++i) {
      sgn[i] = static_cast<int>(c % 3) - 1;
      c /= 3;
      if (sgn[i] != 0) active.push_back(i);
    }
    const Eigen::Index k = static_cast<Eigen::Index>(active.size());
    MatrixXd fa(k, f.cols());
    VectorXd target(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      fa.row(a) = f.row(active[a]);
      // a positive multiplier pins the moment at its upper bound
      target(a) = sgn[active[a]] > 0 ? hi(active[a]) : lo(active[a]);
    }
    // dual on the active set: maximize -<target, z> - log2 Z(z)
    VectorXd z = VectorXd::Zero(k);
    auto obj = [&](const VectorXd& zz) { return -target.dot(zz) - detail::log2_partition(nu, fa, zz, nullptr); };
    bool ok = true;
    for (int it = 0; it < 200 && k > 0; ++it) {
      VectorXd mu;
      detail::log2_partition(nu, fa, z, &mu);
      const VectorXd mean = fa * mu;
      const VectorXd grad = -target + mean;
      if (grad.norm() < 1e-15 * (1.0 + target.norm())) break;
      MatrixXd centered = fa.colwise() - mean;
      MatrixXd hess = -std::log(2.0) * centered * mu.asDiagonal() * centered.transpose();
      hess.diagonal().array() -= 1e-300;
      VectorXd step = hess.ldlt().solve(-grad);
      if (!step.allFinite()) {
        ok = false;
        break;
      }
      double t = 1.0;
      const double f0 = obj(z);
      while (t > 1e-12 && !(obj(z + t * step) >= f0 + 1e-4 * t * grad.dot(step))) t *= 0.5;
      if (t <= 1e-12) break;
      z += t * step;
      if (z.norm() > 1e8) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    VectorXd full = VectorXd::Zero(m);
    for (Eigen::Index a = 0; a < k; ++a) full(active[a]) = z(a);
    VectorXd mu;
    detail::log2_partition(nu, f, full, &mu);
    const VectorXd mom = f * mu;
    bool kkt = true;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double scale = 1.0 + std::abs(mom(i));
      if (sgn[i] == 0) {
        kkt &= mom(i) >= lo(i) - kkt_tol * scale && mom(i) <= hi(i) + kkt_tol * scale;
      } else {
        const double bound = sgn[i] > 0 ? hi(i) : lo(i);
        kkt &= std::abs(mom(i) - bound) <= kkt_tol * scale;
        kkt &= sgn[i] * full(i) >= -1e-9;
      }
    }
    if (!kkt) continue;
    double value = 0.0;
    for (Eigen::Index j = 0; j < mu.size(); ++j)
      if (mu(j) > 0) value += mu(j) * std::log2(mu(j) / nu(j));
    if (value < best.value) {
      best.found = true;
      best.value = value;
      best.z = full;
      best.mu = mu;
    }
  }
  return best;
}

struct RandomInstance {
  VectorXd states;
  VectorXd nu;
  MatrixXd features;
  VectorXd center;
  VectorXd radius;
  VectorXd interior;  ///< distribution whose moments are the box center
};

/// States on [0,1], random positive reference, monomial features, box
/// centered at the moments of a random interior distribution.
inline RandomInstance random_instance(std::mt19937_64& rng, int n_states, int order, double r_lo = 1e-3,
                                      double r_hi = 1e-1) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::gamma_distribution<double> gam(1.0, 1.0);
  RandomInstance r;
  r.states = VectorXd::LinSpaced(n_states, 0.0, 1.0);
  r.nu.resize(n_states);
  VectorXd mu_true(n_states);
  for (int i = 0; i < n_states; ++i) {
    r.nu(i) = 0.2 + unif(rng);
    mu_true(i) = 0.05 + gam(rng);
  }
  r.nu /= r.nu.sum();
  mu_true /= mu_true.sum();
  r.features.resize(order, n_states);
  VectorXd p = VectorXd::Ones(n_states);
  for (int i = 0; i < order; ++i) {
    p = p.cwiseProduct(r.states);
    r.features.row(i) = p.transpose();
  }
  r.center = r.features * mu_true;
  r.interior = mu_true;
  r.radius.resize(order);
  for (int i = 0; i < order; ++i) r.radius(i) = r_lo * std::pow(r_hi / r_lo, unif(rng));
  return r;
}

}  // namespace oracle
