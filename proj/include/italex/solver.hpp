#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "italex/oracles.hpp"

namespace italex {

struct Snapshot {
  double t_ms = 0.0;
  long iter = 0;
  double phi = 0.0;
  double omega = 0.0;
};

struct RoundRecord {
  double eps = 0.0;
  double phi_bar = 0.0;
  long oracle_calls = 0;
  long step_iters = 0;
};

struct OracleCallRecord {
  double alpha = 0.0;
  double rho = 0.0;
  double eps_tol = 0.0;
  double phi_bar = 0.0;
  long inner_iterations = 0;
  double phi_hat_at_return = 0.0;  // lifted value at the returned point
};

struct SolveReport {
  Vec x_final, z_final;
  double alpha_final = 0.0;
  std::vector<double> alpha_trace;  // level before each oracle call
  long rounds = 0;
  long oracle_calls = 0;     // N
  long step_iterations = 0;  // M-bar
  std::vector<RoundRecord> round_records;
  std::vector<OracleCallRecord> oracle_trace;
  std::vector<Snapshot> snapshots;
  double final_phi = 0.0;
  double final_omega = 0.0;
  std::optional<double> feas_dist;  // dist(x, Lev(omega*)), reference only
  double best_phi = kInf;  // minimal phi(x) seen at snapshot granularity
  Vec best_x;
  bool truncated = false;  // external budget cut the run short
  std::string method;
  double eps_target = 0.0;
  double eps1 = 0.0;
  int instance_id = 0;
};

struct SolveOptions {
  long max_oracle_steps = 200000;  // per approximation-oracle call
  long max_oracle_calls = 1000000;
  long snapshot_period = 50;
  // External budgets (benchmark mode): when hit, the solve returns its
  // current state with report.truncated = true instead of raising.
  long max_total_steps = std::numeric_limits<long>::max();
  double max_wall_ms = kInf;
  bool record_oracle_trace = true;
  StepCallback step_callback;  // test hook, called per descent step
};

struct FtResult {
  double alpha_final = 0.0;
  Vec x, z;
  long oracle_calls = 0;
  long step_iterations = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

struct SolveDriver {
  const BilevelInstance& inst;
  const SolveOptions& opts;
  SolveReport rep;
  Clock::time_point t0 = Clock::now();
  bool budget_hit = false;

  SolveDriver(const BilevelInstance& instance, const SolveOptions& options)
      : inst(instance), opts(options) {}

  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0)
        .count();
  }

  bool wall_expired() const {
    return opts.max_wall_ms < kInf && elapsed_ms() > opts.max_wall_ms;
  }

  long remaining_budget() const {
    return opts.max_total_steps - rep.step_iterations;
  }

  void snapshot(const Vec& x, double phi) {
    rep.snapshots.push_back(
        {elapsed_ms(), rep.step_iterations, phi, inst.outer.evaluate(x)});
  }

  StepCallback callback() {
    return [this](const StepEvent& ev) {
      rep.step_iterations += 1;
      if (ev.phi_after < rep.best_phi) {
        rep.best_phi = ev.phi_after;
        rep.best_x = *ev.x_after;
      }
      if (rep.step_iterations % opts.snapshot_period == 0) {
        snapshot(*ev.x_after, ev.phi_after);
      }
      if (opts.step_callback) opts.step_callback(ev);
    };
  }
};

// One approximation-oracle call under the driver's budgets. Wall-clock mode
// chops the call into chunks and resumes from the carried iterate, which
// reproduces the uninterrupted step sequence exactly. Returns true when the
// oracle produced an outcome; false when a budget ended the run first (the
// interrupted iterate is stored in *resume).
inline bool oracle_call_with_budget(SolveDriver& drv, const LiftedPoint& y0,
                                    double alpha, double phi_bar,
                                    double eps_tol, StepKind step,
                                    const StepCallback& cb, OracleOutcome* out,
                                    LiftedPoint* resume) {
  const bool wall_mode = drv.opts.max_wall_ms < kInf;
  LiftedPoint y = y0;
  long consumed = 0;
  for (;;) {
    const long cap = std::min(drv.opts.max_oracle_steps - consumed,
                              drv.remaining_budget());
    const long chunk = wall_mode ? std::min<long>(cap, 4096) : cap;
    try {
      *out = approximation_oracle(drv.inst, y, alpha, phi_bar, eps_tol, step,
                                  chunk, cb);
      out->inner_iterations += consumed;
      if (drv.wall_expired()) drv.budget_hit = true;
      return true;
    } catch (const OracleBudgetExhausted& e) {
      consumed += e.steps_used;
      y = e.last;
      if (drv.remaining_budget() <= 0 || drv.wall_expired()) {
        drv.budget_hit = true;
        *resume = y;
        return false;
      }
      if (consumed >= drv.opts.max_oracle_steps) throw;
      // wall-clock chunk boundary: resume
    }
  }
}

inline FtResult ft_impl(SolveDriver& drv, double eps, double phi_bar,
                        double alpha0, Vec x0, Vec z0, StepKind step) {
  const BilevelInstance& inst = drv.inst;
  const StepCallback cb = drv.callback();
  double alpha = alpha0;
  LiftedPoint y{std::move(x0), std::move(z0), alpha};
  FtResult res;
  const long steps_before = drv.rep.step_iterations;
  for (;;) {
    OracleOutcome out;
    LiftedPoint resume;
    if (!oracle_call_with_budget(drv, y, alpha, phi_bar, eps / 2.0, step, cb,
                                 &out, &resume)) {
      res.alpha_final = alpha;
      res.x = resume.y1;
      res.z = resume.y2;
      res.step_iterations = drv.rep.step_iterations - steps_before;
      return res;
    }
    res.oracle_calls += 1;
    y = out.y;
    y.alpha_tag = alpha;
    drv.rep.alpha_trace.push_back(alpha);
    if (drv.opts.record_oracle_trace) {
      drv.rep.oracle_trace.push_back({alpha, out.rho, eps / 2.0, phi_bar,
                                      out.inner_iterations,
                                      eval_phi_hat(inst, y, alpha)});
    }
    if (out.rho == 0.0 || drv.budget_hit) {
      // rho = 0 certifies phi(y1) + ||y1 - y2||^2 <= phi_bar + eps/2.
      res.alpha_final = alpha;
      res.x = y.y1;
      res.z = y.y2;
      res.step_iterations = drv.rep.step_iterations - steps_before;
      return res;
    }
    alpha = expansion_oracle(alpha, out.rho, inst.outer.kappa,
                             inst.outer.gamma);
    if (res.oracle_calls >= drv.opts.max_oracle_calls) {
      throw OracleBudgetExhausted(y, drv.rep.step_iterations - steps_before);
    }
  }
}

inline void validate_start(const BilevelInstance& inst, double alpha0,
                           const Vec& x0, const Vec& z0) {
  if (inst.nonsmooth.evaluate(x0) == kInf) {
    throw std::invalid_argument("start: x0 outside dom(g)");
  }
  if (!inst.outer.geometry.contains(z0, alpha0)) {
    throw std::invalid_argument("start: z0 outside Lev(alpha0)");
  }
}

inline void finalize_report(SolveDriver& drv, SolveReport& rep, const Vec& x,
                            const Vec& z, double alpha) {
  rep.x_final = x;
  rep.z_final = z;
  rep.alpha_final = alpha;
  rep.final_phi = eval_phi(drv.inst, x);
  rep.final_omega = drv.inst.outer.evaluate(x);
  if (rep.final_phi < rep.best_phi) {
    rep.best_phi = rep.final_phi;
    rep.best_x = x;
  }
  rep.snapshots.push_back({drv.elapsed_ms(), rep.step_iterations,
                           rep.final_phi, rep.final_omega});
  if (drv.inst.ref_omega_star) {
    rep.feas_dist =
        (x - drv.inst.outer.geometry.project(x, *drv.inst.ref_omega_star))
            .norm();
  }
  rep.truncated = drv.budget_hit;
}

}  // namespace detail

// Inner solver C: accelerated proximal gradient from u0 run for the
// ceil(sqrt(2 L R^2 / eps)) iterations the O(1/k^2) rate needs, with R the
// instance's configured radius bound. Exits early once the prox-gradient
// certificate L r (||y - u0|| + R) already proves eps-optimality. Returns
// the best iterate and its value phi_bar = phi(u) >= phi*.
inline std::pair<Vec, double> solve_inner(const BilevelInstance& inst,
                                          const Vec& u0, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("solve_inner: eps must be > 0");
  const double lf = std::max(inst.smooth.lipschitz_grad, 1e-12);
  const double radius = inst.inner_radius_bound;
  const long iters = static_cast<long>(
      std::ceil(std::sqrt(2.0 * lf * radius * radius / eps)));
  Vec x = u0, y = u0;
  double t = 1.0;
  double best_phi = eval_phi(inst, u0);
  Vec best_x = u0;
  for (long k = 0; k < iters; ++k) {
    Vec grad = inst.smooth.gradient(y);
    Vec xn = inst.nonsmooth.prox(y - grad / lf, 1.0 / lf);
    const double phi_xn = eval_phi(inst, xn);
    if (phi_xn < best_phi) {
      best_phi = phi_xn;
      best_x = xn;
    }
    const double res = (xn - y).norm();
    if (lf * res * ((y - u0).norm() + radius) <= 0.99 * eps) break;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    x = std::move(xn);
    t = tn;
  }
  return {best_x, best_phi};
}

// Fixed-tolerance loop: alternate the approximation oracle (at tolerance
// eps/2) with level expansion until the oracle certifies
// phi(x) + ||x - z||^2 <= phi_bar + eps/2.
inline FtResult italex_ft(const BilevelInstance& inst, double eps,
                          double phi_bar, double alpha0, const Vec& x0,
                          const Vec& z0, StepKind step,
                          const SolveOptions& opts = {}) {
  if (eps <= 0.0) throw std::invalid_argument("italex_ft: eps must be > 0");
  detail::validate_start(inst, alpha0, x0, z0);
  detail::SolveDriver drv(inst, opts);
  return detail::ft_impl(drv, eps, phi_bar, alpha0, x0, z0, step);
}

// Changing-tolerance loop: per round r, refresh phi_bar^r by the inner
// solver at eps_r/2, run the fixed-tolerance stage unless the current pair
// already meets the round's bar, halve eps. Stops after the first round
// with eps_r <= eps_target.
inline SolveReport italex_ct(const BilevelInstance& inst, double eps_target,
                             double eps1, double alpha0, const Vec& x0,
                             const Vec& z0, const Vec& u0, StepKind step,
                             const SolveOptions& opts = {}) {
  if (eps_target <= 0.0 || eps1 <= 0.0) {
    throw std::invalid_argument("italex_ct: tolerances must be > 0");
  }
  detail::validate_start(inst, alpha0, x0, z0);
  detail::SolveDriver drv(inst, opts);
  drv.rep.method = step == StepKind::gcg ? "italex-gcg" : "italex-pg";
  drv.rep.eps_target = eps_target;
  drv.rep.eps1 = eps1;
  Vec u = u0, x = x0, z = z0;
  double alpha = alpha0;
  double eps_r = eps1;
  drv.snapshot(x, eval_phi(inst, x));
  for (;;) {
    auto [u_next, phi_bar] = solve_inner(inst, u, eps_r / 2.0);
    u = std::move(u_next);
    RoundRecord rr{eps_r, phi_bar, 0, 0};
    const double lifted = eval_phi(inst, x) + (x - z).squaredNorm();
    if (lifted > phi_bar + eps_r / 2.0) {
      FtResult ft = detail::ft_impl(drv, eps_r, phi_bar, alpha, x, z, step);
      alpha = ft.alpha_final;
      x = ft.x;
      z = ft.z;
      rr.oracle_calls = ft.oracle_calls;
      rr.step_iters = ft.step_iterations;
      drv.rep.oracle_calls += ft.oracle_calls;
    }
    drv.rep.round_records.push_back(rr);
    drv.rep.rounds += 1;
    if (eps_r <= eps_target || drv.budget_hit || drv.wall_expired()) break;
    eps_r /= 2.0;
  }
  SolveReport rep = std::move(drv.rep);
  detail::finalize_report(drv, rep, x, z, alpha);
  return rep;
}

// Smooth-inner variant (g = 0): the loop runs on the single variable x kept
// inside Lev(alpha), so every iterate satisfies omega(x) <= alpha <= omega*.
inline SolveReport italex_smooth(const BilevelInstance& inst,
                                 double eps_target, double eps1, double alpha0,
                                 const Vec& x0, const Vec& u0, StepKind step,
                                 const SolveOptions& opts = {}) {
  if (!inst.nonsmooth.is_zero) {
    throw UnsupportedConfiguration(
        "italex_smooth: requires a smooth inner objective (g = 0)");
  }
  if (eps_target <= 0.0 || eps1 <= 0.0) {
    throw std::invalid_argument("italex_smooth: tolerances must be > 0");
  }
  if (!inst.outer.geometry.contains(x0, alpha0)) {
    throw std::invalid_argument("italex_smooth: x0 outside Lev(alpha0)");
  }
  detail::SolveDriver drv(inst, opts);
  drv.rep.method = "italex-smooth";
  drv.rep.eps_target = eps_target;
  drv.rep.eps1 = eps1;
  const StepCallback cb = drv.callback();
  const double lf = inst.smooth.lipschitz_grad;
  Vec u = u0, x = x0;
  double alpha = alpha0;
  double eps_r = eps1;
  drv.snapshot(x, inst.smooth.value(x));
  for (;;) {
    auto [u_next, phi_bar] = solve_inner(inst, u, eps_r / 2.0);
    u = std::move(u_next);
    RoundRecord rr{eps_r, phi_bar, 0, 0};
    const long steps_before = drv.rep.step_iterations;
    if (inst.smooth.value(x) > phi_bar + eps_r / 2.0) {
      for (;;) {
        const long cap =
            std::min(drv.opts.max_oracle_steps, drv.remaining_budget());
        const bool wall_mode = opts.max_wall_ms < kInf;
        const long chunk = wall_mode ? std::min<long>(cap, 4096) : cap;
        SmoothOracleOutcome out;
        try {
          out = approximation_oracle_smooth(inst, x, alpha, phi_bar,
                                            eps_r / 2.0, step, chunk, cb);
        } catch (const OracleBudgetExhausted& e) {
          x = e.last.y1;
          if (drv.remaining_budget() <= 0 || drv.wall_expired()) {
            drv.budget_hit = true;
            break;
          }
          if (!wall_mode) throw;
          continue;  // chunk boundary, resume from the carried iterate
        }
        rr.oracle_calls += 1;
        drv.rep.oracle_calls += 1;
        x = out.x;
        drv.rep.alpha_trace.push_back(alpha);
        if (drv.opts.record_oracle_trace) {
          drv.rep.oracle_trace.push_back({alpha, out.rho, eps_r / 2.0,
                                          phi_bar, out.inner_iterations,
                                          inst.smooth.value(x)});
        }
        if (out.rho == 0.0 || drv.budget_hit || drv.wall_expired()) break;
        alpha = expansion_oracle_smooth(alpha, out.rho, inst.outer.kappa,
                                        inst.outer.gamma, lf);
        if (rr.oracle_calls >= drv.opts.max_oracle_calls) {
          LiftedPoint last{x, x, alpha};
          throw OracleBudgetExhausted(std::move(last),
                                      drv.rep.step_iterations - steps_before);
        }
      }
      rr.step_iters = drv.rep.step_iterations - steps_before;
    }
    drv.rep.round_records.push_back(rr);
    drv.rep.rounds += 1;
    if (eps_r <= eps_target || drv.budget_hit || drv.wall_expired()) break;
    eps_r /= 2.0;
  }
  SolveReport rep = std::move(drv.rep);
  detail::finalize_report(drv, rep, x, x, alpha);
  return rep;
}

// Worst-case iteration budgets from the convergence analysis, evaluated with
// eta_1 = 1/2 and eta_2 = 1 / (2 (L_f + 2) D^2), D = D_omega* for GCG and
// D-hat_0 for PG. omega_bar must upper-bound omega*; phi_hat_gap0 is
// phi(x0) + ||x0 - z0||^2 - phi_bar_1. Tests assert measured totals against
// k1 + k2 + n.
struct IterationBudget {
  double k1 = 0.0;
  double k2 = 0.0;
  double n = 0.0;
};

inline IterationBudget iteration_budget(const BilevelInstance& inst,
                                        double eps, double eps1,
                                        double phi_hat_gap0, StepKind step,
                                        double omega_bar, double omega_z0) {
  if (eps <= 0.0 || eps1 <= 0.0) {
    throw std::invalid_argument("iteration_budget: tolerances must be > 0");
  }
  const double lift_l = inst.smooth.lipschitz_grad + 2.0;
  const double d_lev = inst.outer.geometry.diameter(omega_bar);
  const double d_star = inst.nonsmooth.domain_diameter + d_lev;
  double d2 = 0.0;
  if (step == StepKind::gcg) {
    if (d_star == kInf) {
      throw UnsupportedConfiguration(
          "iteration_budget: GCG bound needs compact dom(g)");
    }
    d2 = d_star * d_star;
  } else {
    const double delta0 = std::max(phi_hat_gap0, 0.0) + 0.5 * eps1;
    d2 = std::min(6.0 * delta0 + 4.0 * d_lev * d_lev, d_star * d_star);
  }
  const double eta2 = 1.0 / (2.0 * lift_l * d2);
  const double rounds = std::ceil(std::log2(eps1 / eps)) + 1.0;
  IterationBudget b;
  const double arg =
      std::min(2.0 * eta2, 4.0 / eps1) * std::max(phi_hat_gap0, 1e-300);
  b.k1 = std::max(0.0, std::log2(arg));
  b.k2 = 32.0 / (eta2 * eps) + (std::log2(9.0) + 2.0) * rounds;
  b.n = std::ceil(std::pow(2.0, inst.outer.kappa) * inst.outer.gamma *
                  std::max(omega_bar - omega_z0, 0.0) /
                  std::pow(eps, 0.5 * inst.outer.kappa)) +
        std::ceil(std::log2(eps1 / eps)) + 1.0;
  return b;
}

// Checks the sequence bound xi_p <= max{2/eta, xi_1} / p for sequences
// satisfying xi_{p+1} <= xi_p - eta xi_{p+1}^2 (the recursion is validated).
inline bool check_xi_sequence(const std::vector<double>& xi, double eta) {
  if (eta <= 0.0) {
    throw std::invalid_argument("check_xi_sequence: eta must be > 0");
  }
  for (std::size_t p = 0; p < xi.size(); ++p) {
    const double scale = std::max(1.0, std::abs(xi[p]));
    if (xi[p] < -1e-15 * scale) {
      throw std::invalid_argument("check_xi_sequence: negative term");
    }
    if (p + 1 < xi.size() &&
        xi[p + 1] > xi[p] - eta * xi[p + 1] * xi[p + 1] + 1e-12 * scale) {
      throw std::invalid_argument(
          "check_xi_sequence: recursion precondition violated");
    }
  }
  if (xi.empty()) return true;
  const double bound = std::max(2.0 / eta, xi.front());
  for (std::size_t p = 0; p < xi.size(); ++p) {
    if (xi[p] > bound / static_cast<double>(p + 1)) return false;
  }
  return true;
}

// Default start per the shipped convention: x0 = 0 when feasible (else its
// projection onto dom(g)), alpha0 = omega(x0) in the feasible case and the
// infimum of omega otherwise, z0 the projection of x0 onto Lev(alpha0).
struct StartPoint {
  double alpha0 = 0.0;
  Vec x0, z0, u0;
};

inline StartPoint default_start(const BilevelInstance& inst) {
  const Vec zero = Vec::Zero(inst.dim());
  StartPoint s;
  if (inst.nonsmooth.evaluate(zero) < kInf) {
    s.x0 = zero;
    s.alpha0 = inst.outer.evaluate(zero);
  } else {
    s.x0 = inst.nonsmooth.prox(zero, 1.0);
    s.alpha0 = inst.outer.lower_bound;
  }
  s.z0 = inst.outer.geometry.project(s.x0, s.alpha0);
  s.u0 = s.x0;
  return s;
}

}  // namespace italex
