#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <string>
#include <vector>

#include "italex/baselines.hpp"
#include "italex/serialize.hpp"

namespace italex {

// ---------------------------------------------------------------------------
// Synthetic least-squares bilevel instances: A with a log-spaced singular
// spectrum hitting the condition target, sparse ground truth, Gaussian noise.

struct GeneratorSpec {
  int n = 50;
  int m = 25;
  int k_sparse = 5;
  double sigma = 1e-3;
  double cond = 10.0;
  bool identity_A = false;  // test hook: A = I (forces m = n)
  GSpec g;
  OmegaSpec omega;
};

inline InstanceSpec generate_lsq_spec(const GeneratorSpec& gen,
                                      std::uint64_t seed) {
  if (gen.n <= 0 || gen.m <= 0 || gen.k_sparse < 0 || gen.k_sparse > gen.n) {
    throw std::invalid_argument("generate_lsq: invalid shape");
  }
  CounterRng rng(seed);
  InstanceSpec s;
  const int n = gen.n;
  const int m = gen.identity_A ? gen.n : gen.m;
  if (gen.identity_A) {
    s.A = Mat::Identity(n, n);
  } else {
    const int k = std::min(m, n);
    Mat g1(m, k);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j) g1(i, j) = rng.normal();
    Mat g2(n, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) g2(i, j) = rng.normal();
    Mat u = Eigen::HouseholderQR<Mat>(g1).householderQ() * Mat::Identity(m, k);
    Mat v = Eigen::HouseholderQR<Mat>(g2).householderQ() * Mat::Identity(n, k);
    Vec sing(k);
    for (int i = 0; i < k; ++i) {
      const double t = k > 1 ? static_cast<double>(i) / (k - 1) : 0.0;
      sing[i] = std::pow(10.0, -t * std::log10(gen.cond));
    }
    s.A = u * sing.asDiagonal() * v.transpose();
  }

  // Sparse ground truth on a random support, values shaped to dom(g).
  Vec xt = Vec::Zero(n);
  std::set<std::uint64_t> support;
  while (static_cast<int>(support.size()) < gen.k_sparse) {
    support.insert(rng.index(static_cast<std::uint64_t>(n)));
  }
  for (std::uint64_t idx : support) {
    double v = rng.normal();
    if (gen.g.kind == "nonneg") v = std::abs(v);
    xt[static_cast<Eigen::Index>(idx)] = v;
  }
  if (gen.g.kind == "box") {
    xt = xt.cwiseMax(gen.g.lower).cwiseMin(gen.g.upper);
  }
  Vec noise(m);
  for (int i = 0; i < m; ++i) noise[i] = gen.sigma * rng.normal();
  s.b = s.A * xt + noise;
  s.g = gen.g;
  s.omega = gen.omega;
  s.lipschitz = 2.0 * power_iteration_lmax_ata(s.A) * (1.0 + 1e-8);

  // Radius bound for the inner solver: generous cover of the least-norm
  // solution and the planted signal.
  Vec least_norm =
      s.A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(s.b);
  s.radius_bound = 4.0 * (xt.norm() + least_norm.norm()) + 10.0;

  // Consistent full-column-rank systems have the singleton X* = {xt}.
  if (gen.sigma == 0.0 && (gen.identity_A || m >= n)) {
    s.phi_star = 0.0;
    s.x_star = xt;
    InstanceSpec probe = s;
    BilevelInstance tmp = build_instance(probe);
    s.omega_star = tmp.outer.evaluate(xt);
  }
  return s;
}

inline BilevelInstance generate_lsq(int n, int m, int k_sparse, double sigma,
                                    std::uint64_t seed) {
  GeneratorSpec gen;
  gen.n = n;
  gen.m = m;
  gen.k_sparse = k_sparse;
  gen.sigma = sigma;
  return build_instance(generate_lsq_spec(gen, seed));
}

// ---------------------------------------------------------------------------
// Reference oracles. These run their own accelerated prox-gradient loops
// (with function-value restarts) so they stay independent of the descent
// steps they are used to check.

namespace detail {

// FISTA on phi = f + g until the prox-gradient residual drops below rtol.
// Returns the best iterate seen.
inline std::pair<Vec, double> fista_reference(const BilevelInstance& inst,
                                              const Vec& x0, double rtol,
                                              long max_iters) {
  const double lf = std::max(inst.smooth.lipschitz_grad, 1e-12);
  Vec x = x0, y = x0;
  double t = 1.0;
  double best = eval_phi(inst, x0);
  Vec best_x = x0;
  double prev_phi = best;
  for (long k = 0; k < max_iters; ++k) {
    Vec xn = inst.nonsmooth.prox(y - inst.smooth.gradient(y) / lf, 1.0 / lf);
    const double phi_xn = eval_phi(inst, xn);
    if (phi_xn < best) {
      best = phi_xn;
      best_x = xn;
    }
    if ((xn - y).norm() <= rtol * (1.0 + xn.norm())) break;
    if (phi_xn > prev_phi) {  // function-value restart
      y = xn;
      t = 1.0;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = xn + ((t - 1.0) / tn) * (xn - x);
      t = tn;
    }
    prev_phi = phi_xn;
    x = std::move(xn);
  }
  return {best_x, best};
}

}  // namespace detail

// High-accuracy phi*: accelerated prox-gradient to fixed-point residual
// tol * 1e-2; for g = 0 cross-checked against the least-squares value from a
// direct factorization.
inline double reference_phi_star(const BilevelInstance& inst, double tol) {
  if (tol <= 0.0) {
    throw std::invalid_argument("reference_phi_star: tol must be > 0");
  }
  const Vec x0 = inst.nonsmooth.prox(Vec::Zero(inst.dim()), 1.0);
  auto [x, value] = detail::fista_reference(inst, x0, tol * 1e-2, 2000000);
  if (inst.nonsmooth.is_zero && inst.lsq_A) {
    const Vec ls = inst.lsq_A->bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                       .solve(*inst.lsq_b);
    const double direct = (*inst.lsq_A * ls - *inst.lsq_b).squaredNorm();
    return std::min(direct, value);
  }
  return value;
}

// h(alpha) = min phi(y1) + ||y1 - y2||^2 over y2 in Lev(alpha): long-run
// accelerated prox-gradient on the lifted pair from several starts.
inline double reference_h(const BilevelInstance& inst, double alpha,
                          double tol) {
  if (alpha < inst.outer.lower_bound - level_tol(alpha)) {
    throw std::invalid_argument("reference_h: alpha below inf(omega)");
  }
  const double lf = std::max(inst.smooth.lipschitz_grad, 1e-12);
  const double lift_l = lf + 2.0;
  const int n = inst.dim();
  auto run = [&](Vec y1, Vec y2) {
    double t = 1.0;
    Vec x1 = y1, x2 = y2;
    Vec m1 = y1, m2 = y2;
    LiftedPoint lp{y1, y2, alpha};
    double best = eval_phi_hat(inst, lp, alpha);
    double prev = best;
    for (long k = 0; k < 400000; ++k) {
      Vec gf = inst.smooth.gradient(m1);
      Vec n1 = inst.nonsmooth.prox(
          m1 - (gf + 2.0 * (m1 - m2)) / lift_l, 1.0 / lift_l);
      Vec n2 = inst.outer.geometry.project(
          m2 - 2.0 * (m2 - m1) / lift_l, alpha);
      lp.y1 = n1;
      lp.y2 = n2;
      const double val = eval_phi_hat(inst, lp, alpha);
      best = std::min(best, val);
      const double res = std::sqrt((n1 - m1).squaredNorm() +
                                   (n2 - m2).squaredNorm());
      if (res <= std::max(tol * 1e-2, 1e-13) * (1.0 + n1.norm())) break;
      if (val > prev) {
        m1 = n1;
        m2 = n2;
        t = 1.0;
      } else {
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        m1 = n1 + ((t - 1.0) / tn) * (n1 - x1);
        m2 = n2 + ((t - 1.0) / tn) * (n2 - x2);
        t = tn;
      }
      prev = val;
      x1 = std::move(n1);
      x2 = std::move(n2);
    }
    return best;
  };
  const Vec zero_feasible = inst.nonsmooth.prox(Vec::Zero(n), 1.0);
  double best = run(zero_feasible,
                    inst.outer.geometry.project(zero_feasible, alpha));
  CounterRng rng(20240 + static_cast<std::uint64_t>(1e6 * std::abs(alpha)));
  for (int s = 0; s < 2; ++s) {
    Vec y1 = inst.nonsmooth.prox(rng.normal_vec(n), 1.0);
    Vec y2 = inst.outer.geometry.project(rng.normal_vec(n), alpha);
    best = std::min(best, run(std::move(y1), std::move(y2)));
  }
  return best;
}

namespace detail {

// Combined prox of t * (g + lambda * omega) for separable g (none / nonneg /
// box) and omega in {l1, elastic net}; exact componentwise composition.
inline Vec prox_g_plus_lambda_omega(const BilevelInstance& inst, const Vec& v,
                                    double t, double lambda) {
  const double tl = t * lambda;
  Vec u;
  if (inst.outer.kind == OuterKind::l1) {
    u = prox_l1(v, tl);
  } else if (inst.outer.kind == OuterKind::elastic_net) {
    u = prox_l1(v, tl) / (1.0 + 2.0 * tl * inst.outer.en_rho);
  } else {
    throw UnsupportedConfiguration(
        "regularized solve: omega kind lacks a prox");
  }
  return inst.nonsmooth.prox(u, t);
}

// Warm-started FISTA for min f + g + lambda * omega.
inline Vec solve_regularized(const BilevelInstance& inst, double lambda,
                             Vec x0, double rtol, long max_iters = 400000) {
  const double lf = std::max(inst.smooth.lipschitz_grad, 1e-12);
  Vec x = x0, y = std::move(x0);
  double t = 1.0;
  double prev = kInf;
  for (long k = 0; k < max_iters; ++k) {
    Vec xn = prox_g_plus_lambda_omega(
        inst, y - inst.smooth.gradient(y) / lf, 1.0 / lf, lambda);
    const double res = (xn - y).norm();
    const double val = eval_phi(inst, xn) + lambda * inst.outer.evaluate(xn);
    if (res <= rtol * (1.0 + xn.norm())) {
      x = std::move(xn);
      break;
    }
    if (val > prev) {
      y = xn;
      t = 1.0;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = xn + ((t - 1.0) / tn) * (xn - x);
      t = tn;
    }
    prev = val;
    x = std::move(xn);
  }
  return x;
}

}  // namespace detail

// Ladder lambda_l = lambda_max(A^T A) / 2^l, l = 1..count.
inline std::vector<double> default_lambda_ladder(const BilevelInstance& inst,
                                                 int count) {
  const double lmax = std::max(inst.smooth.lipschitz_grad / 2.0, 1e-12);
  std::vector<double> out;
  out.reserve(count);
  for (int l = 1; l <= count; ++l) {
    out.push_back(lmax / std::pow(2.0, l));
  }
  return out;
}

struct PathPoint {
  double lambda = 0.0;
  double phi_gap = 0.0;
  double omega = 0.0;
};

// Trade-off curve of the regularized problems (P_lambda).
inline std::vector<PathPoint> regularization_path(
    const BilevelInstance& inst, const std::vector<double>& lambdas,
    double tol) {
  if (tol <= 0.0) {
    throw std::invalid_argument("regularization_path: tol must be > 0");
  }
  const double phi_star = reference_phi_star(inst, tol);
  std::vector<PathPoint> out;
  Vec x = inst.nonsmooth.prox(Vec::Zero(inst.dim()), 1.0);
  for (double lambda : lambdas) {
    x = detail::solve_regularized(inst, lambda, x, 1e-10);
    out.push_back(
        {lambda, eval_phi(inst, x) - phi_star, inst.outer.evaluate(x)});
  }
  return out;
}

// Deep-path upper-level reference: omega at the smallest ladder lambda whose
// phi-gap is within tol of phi*. An approximation of omega* from inside X*
// (the path approaches it from below as lambda -> 0).
inline double reference_omega_star(const BilevelInstance& inst, double tol) {
  if (inst.outer.kind != OuterKind::l1 &&
      inst.outer.kind != OuterKind::elastic_net) {
    throw UnsupportedConfiguration(
        "reference_omega_star: needs a prox-friendly omega (l1/elastic net)");
  }
  const double phi_star = reference_phi_star(inst, tol);
  const std::vector<double> ladder = default_lambda_ladder(inst, 25);
  Vec x = inst.nonsmooth.prox(Vec::Zero(inst.dim()), 1.0);
  bool found = false;
  double omega_ref = 0.0;
  for (double lambda : ladder) {
    x = detail::solve_regularized(inst, lambda, x, 1e-10);
    if (eval_phi(inst, x) - phi_star <= tol) {
      omega_ref = inst.outer.evaluate(x);
      found = true;
    }
  }
  if (!found) {
    throw NumericalInconsistency(
        "reference_omega_star: path never reached the phi tolerance");
  }
  return omega_ref;
}

// ---------------------------------------------------------------------------
// Experiment harness.

struct MethodConfig {
  std::string name = "italex-pg";  // italex-pg | italex-gcg | italex-smooth
                                   // | bigsam | irpg
  double eps = 1e-4;
  double eps1 = 0.1;
  BaselineConfig baseline;
};

struct BudgetSpec {
  enum class Kind { iterations, wallclock_ms } kind = Kind::iterations;
  double value = 20000;
};

struct ExperimentConfig {
  GeneratorSpec generator;
  int instances = 1;
  std::uint64_t seed = 1;
  std::vector<MethodConfig> methods;
  BudgetSpec budget;
  long snapshot_period = 50;
  int grid_points = 40;
  int jobs = 1;
  double ref_tol = 1e-7;
};

struct MetricSeries {
  std::vector<double> grid;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> delta_phi;    // [method][grid]
  std::vector<std::vector<double>> delta_omega;  // [method][grid]
};

// Grid convention: the value at grid time t is taken from the last snapshot
// at or before t (iteration count in iteration mode, t_ms in wall mode).
inline MetricSeries compute_metrics(const std::vector<SolveReport>& runs,
                                    const std::vector<double>& phi_star,
                                    const std::vector<double>& grid,
                                    bool wall_clock = false) {
  if (runs.empty()) {
    throw std::invalid_argument("compute_metrics: no runs");
  }
  MetricSeries ms;
  ms.grid = grid;
  std::vector<int> instances;
  for (const auto& r : runs) {
    if (std::find(ms.methods.begin(), ms.methods.end(), r.method) ==
        ms.methods.end()) {
      ms.methods.push_back(r.method);
    }
    if (std::find(instances.begin(), instances.end(), r.instance_id) ==
        instances.end()) {
      instances.push_back(r.instance_id);
    }
  }
  // Per-instance normalizers: omega_max over every method/iterate, and the
  // squared norm of the best-phi iterate across methods.
  std::vector<double> omega_max(instances.size(), 0.0);
  std::vector<double> xstar_norm2(instances.size(), 0.0);
  for (std::size_t ii = 0; ii < instances.size(); ++ii) {
    double best_phi = kInf;
    const Vec* best_x = nullptr;
    for (const auto& r : runs) {
      if (r.instance_id != instances[ii]) continue;
      for (const auto& s : r.snapshots) {
        omega_max[ii] = std::max(omega_max[ii], s.omega);
      }
      if (r.best_phi < best_phi && r.best_x.size() > 0) {
        best_phi = r.best_phi;
        best_x = &r.best_x;
      }
    }
    omega_max[ii] = std::max(omega_max[ii], 1e-12);
    xstar_norm2[ii] =
        std::max(1e-12, best_x ? best_x->squaredNorm() : 0.0);
  }
  auto value_at = [&](const SolveReport& r, double t) -> const Snapshot& {
    const Snapshot* last = &r.snapshots.front();
    for (const auto& s : r.snapshots) {
      const double key = wall_clock ? s.t_ms : static_cast<double>(s.iter);
      if (key <= t) last = &s;
    }
    return *last;
  };
  ms.delta_phi.assign(ms.methods.size(),
                      std::vector<double>(grid.size(), 0.0));
  ms.delta_omega.assign(ms.methods.size(),
                        std::vector<double>(grid.size(), 0.0));
  for (std::size_t mi = 0; mi < ms.methods.size(); ++mi) {
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      double sum_phi = 0.0, sum_omega = 0.0;
      long count = 0;
      for (const auto& r : runs) {
        if (r.method != ms.methods[mi]) continue;
        const auto it = std::find(instances.begin(), instances.end(),
                                  r.instance_id);
        const std::size_t ii = it - instances.begin();
        if (r.snapshots.empty()) {
          throw std::invalid_argument("compute_metrics: run has no snapshots");
        }
        const Snapshot& s = value_at(r, grid[gi]);
        sum_phi += (s.phi - phi_star[static_cast<std::size_t>(
                        r.instance_id)]) /
                   xstar_norm2[ii];
        sum_omega += 1.0 - s.omega / omega_max[ii];
        ++count;
      }
      ms.delta_phi[mi][gi] = count ? sum_phi / count : 0.0;
      ms.delta_omega[mi][gi] = count ? sum_omega / count : 0.0;
    }
  }
  return ms;
}

inline std::string metrics_to_csv(const MetricSeries& ms) {
  std::string out = "t,method,delta_phi,delta_omega\n";
  char buf[128];
  for (std::size_t gi = 0; gi < ms.grid.size(); ++gi) {
    for (std::size_t mi = 0; mi < ms.methods.size(); ++mi) {
      std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g,%.17g\n", ms.grid[gi],
                    ms.methods[mi].c_str(), ms.delta_phi[mi][gi],
                    ms.delta_omega[mi][gi]);
      out += buf;
    }
  }
  return out;
}

inline std::vector<SolveReport> run_methods_on_instance(
    const BilevelInstance& inst, const ExperimentConfig& cfg,
    int instance_id) {
  std::vector<SolveReport> out;
  for (const auto& mc : cfg.methods) {
    SolveOptions opts;
    opts.snapshot_period = cfg.snapshot_period;
    long iteration_budget = std::numeric_limits<long>::max();
    if (cfg.budget.kind == BudgetSpec::Kind::iterations) {
      iteration_budget = static_cast<long>(cfg.budget.value);
      opts.max_total_steps = iteration_budget;
    } else {
      opts.max_wall_ms = cfg.budget.value;
    }
    const StartPoint start = default_start(inst);
    SolveReport rep;
    if (mc.name == "italex-pg" || mc.name == "italex-gcg") {
      rep = italex_ct(inst, mc.eps, mc.eps1, start.alpha0, start.x0, start.z0,
                      start.u0,
                      mc.name == "italex-gcg" ? StepKind::gcg : StepKind::pg,
                      opts);
    } else if (mc.name == "italex-smooth") {
      rep = italex_smooth(inst, mc.eps, mc.eps1, start.alpha0, start.x0,
                          start.u0, StepKind::pg, opts);
    } else if (mc.name == "bigsam" || mc.name == "irpg") {
      BaselineConfig bc = mc.baseline;
      bc.method = mc.name == "bigsam" ? BaselineConfig::Method::bigsam
                                      : BaselineConfig::Method::irpg;
      rep = run_baseline(inst, bc, iteration_budget, start.x0, opts);
    } else {
      throw std::invalid_argument("unknown method: " + mc.name);
    }
    rep.instance_id = instance_id;
    out.push_back(std::move(rep));
  }
  return out;
}

struct ExperimentBundle {
  std::vector<InstanceSpec> instance_specs;
  std::vector<double> phi_star;
  std::vector<SolveReport> runs;
  MetricSeries metrics;
};

inline ExperimentBundle run_experiment(const ExperimentConfig& cfg) {
  if (cfg.instances < 1 || cfg.methods.empty()) {
    throw std::invalid_argument("run_experiment: empty configuration");
  }
  ExperimentBundle bundle;
  bundle.instance_specs.reserve(cfg.instances);
  std::vector<BilevelInstance> insts;
  insts.reserve(cfg.instances);
  for (int i = 0; i < cfg.instances; ++i) {
    bundle.instance_specs.push_back(
        generate_lsq_spec(cfg.generator, cfg.seed + static_cast<std::uint64_t>(i)));
    insts.push_back(build_instance(bundle.instance_specs.back()));
  }
  bundle.phi_star.resize(cfg.instances);
  std::vector<std::vector<SolveReport>> per_instance(cfg.instances);
  auto work = [&](int i) {
    bundle.phi_star[static_cast<std::size_t>(i)] =
        reference_phi_star(insts[static_cast<std::size_t>(i)], cfg.ref_tol);
    per_instance[static_cast<std::size_t>(i)] =
        run_methods_on_instance(insts[static_cast<std::size_t>(i)], cfg, i);
  };
  if (cfg.jobs <= 1) {
    for (int i = 0; i < cfg.instances; ++i) work(i);
  } else {
    std::vector<std::future<void>> futs;
    for (int i = 0; i < cfg.instances; ++i) {
      futs.push_back(std::async(std::launch::async, work, i));
      if (static_cast<int>(futs.size()) == cfg.jobs) {
        for (auto& f : futs) f.get();
        futs.clear();
      }
    }
    for (auto& f : futs) f.get();
  }
  for (auto& batch : per_instance) {
    for (auto& r : batch) bundle.runs.push_back(std::move(r));
  }
  std::vector<double> grid;
  const int points = std::max(cfg.grid_points, 1);
  for (int j = 1; j <= points; ++j) {
    const double t = cfg.budget.value * static_cast<double>(j) / points;
    if (grid.empty() || t > grid.back()) grid.push_back(t);
  }
  bundle.metrics =
      compute_metrics(bundle.runs, bundle.phi_star, grid,
                      cfg.budget.kind == BudgetSpec::Kind::wallclock_ms);
  return bundle;
}

// ---------------------------------------------------------------------------
// Config / results I/O.

inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  const auto& g = j.at("generator");
  cfg.generator.n = g.value("n", 50);
  cfg.generator.m = g.value("m", 25);
  cfg.generator.k_sparse = g.value("k_sparse", 5);
  cfg.generator.sigma = g.value("sigma", 1e-3);
  cfg.generator.cond = g.value("cond", 10.0);
  cfg.generator.identity_A = g.value("identity_A", false);
  if (g.contains("g")) {
    cfg.generator.g.kind = g.at("g").value("kind", "none");
    if (cfg.generator.g.kind == "box") {
      cfg.generator.g.lower = vec_from_json(g.at("g").at("lower"));
      cfg.generator.g.upper = vec_from_json(g.at("g").at("upper"));
    }
  }
  if (g.contains("omega")) {
    cfg.generator.omega.kind = g.at("omega").value("kind", "l1");
    cfg.generator.omega.rho = g.at("omega").value("rho", 0.05);
    cfg.generator.omega.row = g.at("omega").value("row", 1);
    if (g.at("omega").contains("Q")) {
      cfg.generator.omega.Q = mat_from_json(g.at("omega").at("Q"));
    }
  }
  cfg.instances = j.value("instances", 1);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.snapshot_period = j.value("snapshot_period", 50L);
  cfg.grid_points = j.value("grid_points", 40);
  cfg.jobs = j.value("jobs", 1);
  cfg.ref_tol = j.value("ref_tol", 1e-7);
  if (j.contains("budget")) {
    const std::string kind = j.at("budget").value("kind", "iterations");
    if (kind == "iterations") {
      cfg.budget.kind = BudgetSpec::Kind::iterations;
    } else if (kind == "wallclock_ms") {
      cfg.budget.kind = BudgetSpec::Kind::wallclock_ms;
    } else {
      throw std::invalid_argument("unknown budget kind: " + kind);
    }
    cfg.budget.value = j.at("budget").value("value", 20000.0);
  }
  for (const auto& m : j.at("methods")) {
    MethodConfig mc;
    mc.name = m.at("name").get<std::string>();
    mc.eps = m.value("eps", 1e-4);
    mc.eps1 = m.value("eps1", 0.1);
    mc.baseline.huber_delta = m.value("delta", 1.0);
    mc.baseline.averaging_coeff = m.value("c", 2.0);
    mc.baseline.inner_stepsize = m.value("t", 0.0);
    mc.baseline.outer_stepsize = m.value("s", 0.0);
    mc.baseline.lambda0 = m.value("lambda0", 0.0);
    cfg.methods.push_back(std::move(mc));
  }
  return cfg;
}

inline json experiment_results_json(const ExperimentBundle& bundle) {
  json j;
  json instances = json::array();
  for (std::size_t i = 0; i < bundle.instance_specs.size(); ++i) {
    instances.push_back({{"id", i}, {"phi_star", bundle.phi_star[i]}});
  }
  j["instances"] = std::move(instances);
  json runs = json::array();
  for (const auto& r : bundle.runs) runs.push_back(report_to_json(r));
  j["runs"] = std::move(runs);
  return j;
}

inline void write_experiment_outputs(const ExperimentBundle& bundle,
                                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "results.json");
    if (!out) throw std::runtime_error("cannot write results.json in " + out_dir);
    out << experiment_results_json(bundle).dump(1) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "metrics.csv");
    if (!out) throw std::runtime_error("cannot write metrics.csv in " + out_dir);
    out << metrics_to_csv(bundle.metrics);
  }
}

}  // namespace italex
