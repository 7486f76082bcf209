#pragma once

// Subcommand drivers behind the command-line tool. Each writes CSV to the
// configured output (stdout when none) and returns the process exit code:
// 0 certified, 2 ran but uncertified, 1 error.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "maxent/closure.hpp"
#include "maxent/cmdp.hpp"
#include "maxent/config.hpp"
#include "maxent/discrete.hpp"
#include "maxent/fast_gradient.hpp"
#include "maxent/slater.hpp"

namespace maxent {

enum ExitCode : int { exit_certified = 0, exit_error = 1, exit_uncertified = 2 };

namespace detail {

inline MomentProblem moment_problem_from(const Settings& s) {
  const auto& m = s.list("moments");
  detail::require(!m.empty(), "moments must not be empty");
  const Vector y = Eigen::Map<const Vector>(m.data(), static_cast<Index>(m.size()));
  return MomentProblem::with_uniform_radius(SupportInterval(s.real("support_lo"), s.real("support_hi")), y,
                                            s.real("uncertainty"));
}

/// Lebesgue density of the Gibbs measure at z evaluated at x.
inline double gibbs_density_at(double x, const Vector& z, double log2_partition, const SupportInterval& support) {
  double e = 0.0;
  double p = 1.0;
  for (Index i = 0; i < z.size(); ++i) {
    p *= x;
    e -= z(i) * p;
  }
  return std::exp2(e - log2_partition) / support.length();
}

class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw Error("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

inline std::string sibling_path(const std::string& path, const std::string& suffix) {
  if (path.empty()) return {};
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix;
}

}  // namespace detail

inline int run_solve(const RunConfig& cfg, std::ostream& log) {
  const Settings& s = cfg.settings;
  const MomentProblem problem = detail::moment_problem_from(s);
  const QuadratureRule rule =
      composite_rule(problem.support(), s.integer("quadrature_nodes"), RuleKind::simpson);
  const GibbsModel model = GibbsModel::from_problem(problem, rule);

  std::optional<SlaterData> slater;
  try {
    const SlaterResult sr = find_polynomial_slater(problem, s.integer("slater_degree"));
    if (sr.usable()) slater = sr.data();
    log << "slater: degree " << s.integer("slater_degree") << ", C = " << sr.C << " bits, margin " << sr.margin
        << (sr.positivity_certified ? "" : " (positivity not certified)") << '\n';
  } catch (const InfeasibleError& e) {
    log << "slater: " << e.what() << "; running without a-priori guarantees\n";
  }

  std::vector<double> eps = s.list("epsilons");
  if (s.was_set("epsilon")) eps = {s.real("epsilon")};
  detail::require(!eps.empty(), "epsilons must not be empty");

  detail::OutputSink out(cfg.output_path);
  auto& os = out.stream();
  os << "# J_UB and J_LB in bits (log base 2), sign convention J = -D(mu||nu); feas_dist and apriori_feas_bound "
        "are Euclidean distances in moment space\n";
  os << "epsilon,J_UB,J_LB,iterations,feas_dist,apriori_feas_bound,certified\n";
  os << std::setprecision(10);
  bool all_certified = slater.has_value();
  std::vector<SolveResult> runs;
  for (double e : eps) {
    SolverConfig sc;
    sc.epsilon = e;
    sc.stopping = s.text("stopping") == "aposteriori" ? Stopping::aposteriori : Stopping::apriori;
    sc.diameter = s.text("diameter") == "half_norm" ? DiameterPolicy::half_norm : DiameterPolicy::half_squared_norm;
    if (!slater) {
      // no Slater point: fixed smoothing and a fixed budget, no guarantee
      sc.eta_override = SmoothingParams{e, e, Vector()};
      sc.stopping = Stopping::fixed;
      sc.max_iterations = 10000;
    }
    SolveResult r = fast_gradient_solve(model, problem.target(), sc, slater);
    const Certificate& c = r.certificate;
    all_certified = all_certified && c.certified;
    os << e << ',' << -c.dual_value << ',' << -c.upper_bound << ',' << c.iterations << ',' << c.feasibility_distance
       << ',' << c.apriori_feasibility_bound << ',' << (c.certified ? 1 : 0) << '\n';
    log << "epsilon " << e << ": " << c.iterations << " iterations, bracket [" << -c.upper_bound << ", "
        << -c.dual_value << "]\n";
    runs.push_back(std::move(r));
  }

  const std::string density_path = detail::sibling_path(cfg.output_path, ".density.csv");
  if (!density_path.empty()) {
    std::ofstream d(density_path);
    if (!d) throw Error("cannot open output file '" + density_path + "'");
    d << "# Lebesgue densities on the support, sampled uniformly\n";
    d << "x";
    for (double e : eps) d << ",mu_eps_" << e;
    d << '\n' << std::setprecision(10);
    const Index n = s.integer("density_samples");
    const auto& sup = problem.support();
    for (Index j = 0; j < n; ++j) {
      const double x = n == 1 ? sup.lower : sup.lower + sup.length() * static_cast<double>(j) / (n - 1.0);
      d << x;
      for (const auto& r : runs) {
        const double log2_z = gibbs_at(r.z_hat, model).log2_partition;
        d << ',' << detail::gibbs_density_at(x, r.z_hat, log2_z, sup);
      }
      d << '\n';
    }
  }
  return all_certified ? exit_certified : exit_uncertified;
}

inline int run_slater(const RunConfig& cfg, std::ostream& log) {
  const Settings& s = cfg.settings;
  const MomentProblem problem = detail::moment_problem_from(s);
  const Index r = s.integer("slater_degree");
  SlaterResult sr;
  try {
    sr = find_polynomial_slater(problem, r);
  } catch (const InfeasibleError& e) {
    log << "slater: degree " << r << " infeasible: " << e.what() << '\n';
    return exit_uncertified;
  }
  detail::OutputSink out(cfg.output_path);
  auto& os = out.stream();
  os << "# polynomial Slater density (Lebesgue, on the support); C = " << std::setprecision(10) << sr.C
     << " bits, delta = " << sr.delta << ", positivity margin = " << sr.margin << '\n';
  os << "x,density\n";
  const Index n = s.integer("density_samples");
  const auto& sup = problem.support();
  for (Index j = 0; j < n; ++j) {
    const double x = n == 1 ? sup.lower : sup.lower + sup.length() * static_cast<double>(j) / (n - 1.0);
    os << x << ',' << sr.density(x) << '\n';
  }
  log << "slater: degree " << r << ", C = " << sr.C << " bits, margin " << sr.margin
      << (sr.positivity_certified ? ", positivity certified\n" : ", positivity NOT certified\n");
  return sr.positivity_certified ? exit_certified : exit_uncertified;
}

inline int run_discrete(const RunConfig& cfg, std::ostream& log) {
  const Settings& s = cfg.settings;
  const auto& st = s.list("states");
  const auto& mo = s.list("discrete_moments");
  detail::require(!st.empty() && !mo.empty(), "states and discrete_moments must not be empty");
  const Vector states = Eigen::Map<const Vector>(st.data(), static_cast<Index>(st.size()));
  Vector ref;
  if (s.list("reference").empty()) {
    ref = Vector::Constant(states.size(), 1.0 / static_cast<double>(states.size()));
  } else {
    const auto& rf = s.list("reference");
    detail::require(rf.size() == st.size(), "reference must have one weight per state");
    ref = Eigen::Map<const Vector>(rf.data(), static_cast<Index>(rf.size()));
    ref /= ref.sum();
  }
  const Vector center = Eigen::Map<const Vector>(mo.data(), static_cast<Index>(mo.size()));
  const DiscreteProblem problem = DiscreteProblem::monomial(
      states, ref, center.size(),
      TargetSet::box(center, Vector::Constant(center.size(), s.real("discrete_uncertainty"))));
  DiscreteOptions opt;
  opt.solver.stopping = Stopping::aposteriori;
  opt.solver.prox_center = center;
  const DiscreteSolution sol = solve_discrete(problem, s.real("epsilon"), opt);
  const Certificate& c = sol.certificate;

  detail::OutputSink out(cfg.output_path);
  auto& os = out.stream();
  os << std::setprecision(10);
  os << "# probabilities of the maxent distribution; bracket in bits: lower " << c.dual_value << ", upper "
     << c.upper_bound << ", feas_dist " << c.feasibility_distance << ", iterations " << c.iterations << '\n';
  os << "state,reference,probability\n";
  for (Index j = 0; j < states.size(); ++j) os << states(j) << ',' << ref(j) << ',' << sol.weights(j) << '\n';
  log << "discrete: D(mu||nu) in [" << c.dual_value << ", " << c.upper_bound << "] bits after " << c.iterations
      << " iterations\n";
  return c.certified ? exit_certified : exit_uncertified;
}

inline int run_closure(const RunConfig& cfg, std::ostream& log) {
  const Settings& s = cfg.settings;
  const DimerizationSystem sys(s.real("k1"), s.real("k2"), s.integer("M0"), s.integer("D0"));
  ClosureConfig cc;
  cc.order = s.integer("order");
  cc.kappa = s.real("kappa");
  cc.support_max = sys.S0();
  cc.parity_support = s.flag("parity_support");
  IntegrationOptions io;
  io.t_end = s.real("t_end");
  io.dt = s.real("dt");
  const auto traj = integrate_closure_ode(sys, cc, io);
  Vector times(static_cast<Index>(traj.size()));
  for (std::size_t i = 0; i < traj.size(); ++i) times(static_cast<Index>(i)) = traj[i].t;

  detail::OutputSink out(cfg.output_path);
  auto& os = out.stream();
  os << std::setprecision(10);
  os << "# raw moments of the monomer count; third_moment is empty where the closure does not track it\n";
  os << "t,mean,second_moment,third_moment,source\n";
  for (const auto& p : traj) {
    os << p.t << ',' << p.moments(1) << ',' << p.moments(2) << ',';
    if (p.moments.size() > 3) os << p.moments(3);
    os << ",closure\n";
  }
  if (s.integer("n_traj") > 0) {
    const SsaResult ssa =
        ssa_simulate(sys, s.integer("n_traj"), times, static_cast<std::uint64_t>(s.integer("seed")));
    for (Index i = 0; i < times.size(); ++i)
      os << times(i) << ',' << ssa.mean(i, 0) << ',' << ssa.mean(i, 1) << ',' << ssa.mean(i, 2) << ",ssa\n";
  }
  if (s.flag("exact")) {
    const Matrix ex = exact_cme_moments(sys, times);
    for (Index i = 0; i < times.size(); ++i)
      os << times(i) << ',' << ex(i, 0) << ',' << ex(i, 1) << ',' << ex(i, 2) << ",exact\n";
  }
  log << "closure: order " << cc.order << ", <m^2>(" << traj.back().t << ") = " << traj.back().moments(2) << '\n';
  return exit_certified;
}

inline int run_mdp(const RunConfig& cfg, std::ostream& log) {
  const Settings& s = cfg.settings;
  InventoryModel base;
  base.capacity = s.real("capacity");
  base.lambda = s.real("lambda");
  base.v = s.real("v");
  base.p = s.real("p");
  base.h = s.real("h");
  std::vector<std::pair<double, double>> scenarios;
  if (s.text("scenarios") == "standard") {
    scenarios = {{0.0, 1.0}, {0.5, 0.4}, {0.5, 0.3}, {0.1, 0.1}};
  } else {
    scenarios = {{s.real("ell1"), s.real("ell2")}};
  }
  AdpConfig ac;
  ac.zeta = s.real("zeta");
  ac.outer_iterations = s.integer("outer_k");
  ac.inner_iterations = s.integer("inner_iters");
  ac.inner_eta = s.real("eta");
  const BasisSet basis = fourier_basis(s.integer("n"), base.capacity, s.real("theta"));
  const StateActionGrid grid = StateActionGrid::uniform(s.integer("grid_ns"), s.integer("grid_na"));

  detail::OutputSink out(cfg.output_path);
  auto& os = out.stream();
  os << std::setprecision(10);
  os << "# J is the long-run average cost including the +2vC shift, J_unshifted without it (profit = "
        "-J_unshifted); margins are <y_hat,d> - kappa, feasible when <= 0; error bound (zero basis residual) "
     << adp_error_bound(base, basis, ac, std::max(1L, ac.outer_iterations), 0.0) << '\n';
  os << "scenario,ell1,ell2,iteration,J,J_unshifted,margin_mean,margin_second,w_norm\n";
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    InventoryModel m = base;
    m.ell1 = scenarios[k].first;
    m.ell2 = scenarios[k].second;
    const CmdpData data = CmdpData::build(m, grid, basis);
    const AdpResult r = adp_solve(data, ac);
    for (const auto& t : r.trace) {
      os << k + 1 << ',' << m.ell1 << ',' << m.ell2 << ',' << t.iteration << ',' << t.J << ','
         << t.J - m.shift() << ',' << t.margin_mean << ',' << t.margin_second << ',' << t.w_norm << '\n';
    }
    log << "mdp scenario " << k + 1 << " (ell1=" << m.ell1 << ", ell2=" << m.ell2 << "): J = " << r.J
        << ", profit = " << -r.J_unshifted << '\n';
  }
  return exit_certified;
}

/// Dispatches on cfg.subcommand; errors are reported on `log` and map to 1.
inline int run(const RunConfig& cfg, std::ostream& log = std::cerr) {
  try {
    if (cfg.subcommand == "solve") return run_solve(cfg, log);
    if (cfg.subcommand == "slater") return run_slater(cfg, log);
    if (cfg.subcommand == "discrete") return run_discrete(cfg, log);
    if (cfg.subcommand == "closure") return run_closure(cfg, log);
    if (cfg.subcommand == "mdp") return run_mdp(cfg, log);
    log << "error: unknown subcommand '" << cfg.subcommand << "'\n";
  } catch (const std::exception& e) {
    log << "error (" << cfg.subcommand << "): " << e.what() << '\n';
  }
  return exit_error;
}

}  // namespace maxent
