#pragma once

#include <cmath>
#include <string>

#include "italex/solver.hpp"

namespace italex {

// Schedules follow the sequence conditions of the averaging scheme:
// alpha_k = min{1, c/k} (vanishing, non-summable, ratio -> 1) and
// lambda_k = lambda0 / k for the iterative-regularization baseline.
struct BaselineConfig {
  enum class Method { bigsam, irpg } method = Method::bigsam;
  double inner_stepsize = 0.0;   // t; default 1/L_f
  double outer_stepsize = 0.0;   // s; default 1/L_omega (resp. 1/L_smoothed)
  double averaging_coeff = 2.0;  // c in alpha_k = min{1, c/k}
  double lambda0 = 0.0;          // default L_f
  double huber_delta = 1.0;      // smoothing width for nonsmooth outer parts
};

// Huber-smoothed l1-plus-ridge outer: omega_tilde = H_delta + rho ||x||^2,
// gradient clamp(x_i/delta, -1, 1) + 2 rho x_i, with (1/delta + 2 rho)-
// Lipschitz gradient and a uniform gap of delta/2 per coordinate in the
// quadratic regime.
struct SmoothedOuter {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  double grad_lipschitz = 0.0;
  double rho = 0.0;
  double delta = 0.0;
};

inline SmoothedOuter huber_smooth_outer(double rho, double delta) {
  if (delta <= 0.0) {
    throw std::invalid_argument("huber_smooth_outer: delta must be > 0");
  }
  SmoothedOuter s;
  s.rho = rho;
  s.delta = delta;
  s.value = [rho, delta](const Vec& x) {
    double v = rho * x.squaredNorm();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double a = std::abs(x[i]);
      v += a <= delta ? a * a / (2.0 * delta) : a - 0.5 * delta;
    }
    return v;
  };
  s.gradient = [rho, delta](const Vec& x) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      g[i] = std::clamp(x[i] / delta, -1.0, 1.0) + 2.0 * rho * x[i];
    }
    return g;
  };
  s.grad_lipschitz = 1.0 / delta + 2.0 * rho;
  return s;
}

namespace detail {

struct BaselineContext {
  std::function<Vec(const Vec&)> outer_grad;
  double s = 0.0;         // outer stepsize
  double t = 0.0;         // inner prox-gradient stepsize
  double l_omega = 0.0;   // Lipschitz constant of the (smoothed) outer grad
  double c = 2.0;
  double lambda0 = 0.0;
};

inline BaselineContext make_baseline_context(const BilevelInstance& inst,
                                             const BaselineConfig& cfg) {
  BaselineContext ctx;
  ctx.c = cfg.averaging_coeff;
  const double lf = std::max(inst.smooth.lipschitz_grad, 1e-12);
  ctx.t = cfg.inner_stepsize > 0.0 ? cfg.inner_stepsize : 1.0 / lf;
  ctx.lambda0 = cfg.lambda0 > 0.0 ? cfg.lambda0 : lf;
  if (inst.outer.is_smooth()) {
    ctx.outer_grad = inst.outer.gradient;
    ctx.l_omega = inst.outer.grad_lipschitz;
  } else if (cfg.method == BaselineConfig::Method::bigsam &&
             inst.outer.kind == OuterKind::elastic_net) {
    SmoothedOuter sm = huber_smooth_outer(inst.outer.en_rho, cfg.huber_delta);
    ctx.outer_grad = sm.gradient;
    ctx.l_omega = sm.grad_lipschitz;
  } else {
    throw UnsupportedConfiguration(
        std::string(cfg.method == BaselineConfig::Method::bigsam
                        ? "bigsam"
                        : "irpg") +
        ": outer function must be smooth" +
        (cfg.method == BaselineConfig::Method::bigsam
             ? " or smoothable (elastic net via Huber)"
             : ""));
  }
  ctx.s = cfg.outer_stepsize > 0.0 ? cfg.outer_stepsize : 1.0 / ctx.l_omega;
  return ctx;
}

inline Vec bigsam_step_ctx(const BilevelInstance& inst,
                           const BaselineContext& ctx, const Vec& x, long k) {
  const double ak = std::min(1.0, ctx.c / static_cast<double>(std::max(k, 1L)));
  Vec outer = x - ctx.s * ctx.outer_grad(x);
  Vec inner = inst.nonsmooth.prox(x - ctx.t * inst.smooth.gradient(x), ctx.t);
  return ak * outer + (1.0 - ak) * inner;
}

inline Vec irpg_step_ctx(const BilevelInstance& inst,
                         const BaselineContext& ctx, const Vec& x, long k) {
  const double lk = ctx.lambda0 / static_cast<double>(std::max(k, 1L));
  const double lf = std::max(inst.smooth.lipschitz_grad, 1e-12);
  const double t = 1.0 / (lf + lk * ctx.l_omega);
  Vec grad = inst.smooth.gradient(x) + lk * ctx.outer_grad(x);
  return inst.nonsmooth.prox(x - t * grad, t);
}

}  // namespace detail

// Convex combination of an outer gradient step and an inner prox-gradient
// step with vanishing weight alpha_k.
inline Vec bigsam_step(const BilevelInstance& inst, const Vec& x, long k,
                       const BaselineConfig& cfg) {
  return detail::bigsam_step_ctx(inst, detail::make_baseline_context(inst, cfg),
                                 x, k);
}

// Prox-gradient step on phi + lambda_k omega with stepsize matched to the
// regularized smoothness constant.
inline Vec irpg_step(const BilevelInstance& inst, const Vec& x, long k,
                     const BaselineConfig& cfg) {
  BaselineConfig c = cfg;
  c.method = BaselineConfig::Method::irpg;
  return detail::irpg_step_ctx(inst, detail::make_baseline_context(inst, c), x,
                               k);
}

inline SolveReport run_baseline(const BilevelInstance& inst,
                                const BaselineConfig& cfg, long iterations,
                                const Vec& x0, const SolveOptions& opts = {}) {
  const detail::BaselineContext ctx = detail::make_baseline_context(inst, cfg);
  detail::SolveDriver drv(inst, opts);
  drv.rep.method =
      cfg.method == BaselineConfig::Method::bigsam ? "bigsam" : "irpg";
  Vec x = x0;
  drv.snapshot(x, eval_phi(inst, x));
  const long budget = std::min<long>(iterations, opts.max_total_steps);
  for (long k = 1; k <= budget; ++k) {
    x = cfg.method == BaselineConfig::Method::bigsam
            ? detail::bigsam_step_ctx(inst, ctx, x, k)
            : detail::irpg_step_ctx(inst, ctx, x, k);
    drv.rep.step_iterations += 1;
    if (drv.rep.step_iterations % opts.snapshot_period == 0) {
      const double phi = eval_phi(inst, x);
      drv.snapshot(x, phi);
      if (phi < drv.rep.best_phi) {
        drv.rep.best_phi = phi;
        drv.rep.best_x = x;
      }
    }
    if (opts.max_wall_ms < kInf && drv.elapsed_ms() > opts.max_wall_ms) {
      drv.budget_hit = true;
      break;
    }
  }
  SolveReport rep = std::move(drv.rep);
  rep.x_final = x;
  rep.z_final = x;
  rep.final_phi = eval_phi(inst, x);
  rep.final_omega = inst.outer.evaluate(x);
  if (rep.final_phi < rep.best_phi) {
    rep.best_phi = rep.final_phi;
    rep.best_x = x;
  }
  rep.snapshots.push_back({drv.elapsed_ms(), rep.step_iterations,
                           rep.final_phi, rep.final_omega});
  if (inst.ref_omega_star) {
    rep.feas_dist =
        (x - inst.outer.geometry.project(x, *inst.ref_omega_star)).norm();
  }
  rep.truncated = drv.budget_hit;
  return rep;
}

}  // namespace italex
