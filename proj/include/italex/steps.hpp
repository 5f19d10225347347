#pragma once

#include <cmath>

#include "italex/problem.hpp"

namespace italex {

enum class StepKind { gcg, pg };

inline const char* step_kind_name(StepKind s) {
  return s == StepKind::gcg ? "gcg" : "pg";
}

// Diameter data for the level alpha at round tolerance eps: d_alpha bounds
// the diameter of dom(g) x Lev(alpha) (may be +inf), d_lev_alpha the level
// set alone. d_tilde() is the computable bound on the diameter of the
// current sublevel set of phi_hat, valid whenever phi_bar <= phi* + eps/2.
struct DiameterContext {
  double d_alpha = kInf;
  double d_lev_alpha = 0.0;
  double phi_bar = 0.0;
  double eps = 0.0;

  double d_tilde(double phi_hat_y) const {
    const double slack = std::max(0.0, phi_hat_y - phi_bar + 0.5 * eps);
    const double root =
        std::sqrt(6.0 * slack + 4.0 * d_lev_alpha * d_lev_alpha);
    return std::min(d_alpha, root);
  }
};

inline DiameterContext make_diameter_context(const BilevelInstance& inst,
                                             double alpha, double phi_bar,
                                             double eps) {
  DiameterContext ctx;
  ctx.d_lev_alpha = inst.outer.geometry.diameter(alpha);
  ctx.d_alpha = inst.nonsmooth.domain_diameter + ctx.d_lev_alpha;
  ctx.phi_bar = phi_bar;
  ctx.eps = eps;
  return ctx;
}

// One descent iteration on phi_hat^alpha. `measure` is the optimality
// measure evaluated at the INPUT point; `decrease` the achieved descent.
struct StepOutcome {
  LiftedPoint next;
  double measure = 0.0;
  double decrease = 0.0;
};

namespace detail {

// Extended result so the oracle loop can chain phi_hat values instead of
// re-evaluating them.
struct StepDetail {
  StepOutcome out;
  double phi_hat_before = 0.0;
  double phi_hat_after = 0.0;
  double d_tilde = 0.0;
};

// Linear oracle of the g-part of the lifted composite. Compact dom(g) uses
// g's own oracle; unbounded domains are intersected with a ball of radius
// `radius` (the sublevel-set diameter bound, which keeps the gap certificate
// valid). For g = 0 the ball sits at the current iterate and the minimizer
// is the exact ball point; for the nonnegativity indicator the origin-
// centered orthant-ball vertex is used: radius on the most negative cost
// coordinate, 0 when every cost is nonnegative.
inline Vec g_part_lmo(const NonsmoothObjective& g, const Vec& cost,
                      const Vec& center, double radius) {
  if (g.has_linear_oracle()) return g.linear_oracle(cost);
  if (g.domain == NonsmoothObjective::Domain::all) {
    const double nrm = cost.norm();
    if (nrm == 0.0 || radius == kInf) return center;
    return Vec(center - (radius / nrm) * cost);
  }
  if (g.domain == NonsmoothObjective::Domain::nonneg) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < cost.size(); ++i) {
      if (cost[i] < cost[best]) best = i;
    }
    Vec p = Vec::Zero(cost.size());
    if (cost[best] < 0.0 && radius != kInf) p[best] = radius;
    return p;
  }
  throw UnsupportedConfiguration(
      "gcg_step: g has no linear oracle and no ball-restricted fallback");
}

inline StepDetail gcg_step_detail(const BilevelInstance& inst,
                                  const LiftedPoint& y, double alpha,
                                  const DiameterContext& ctx,
                                  double phi_hat_hint = kInf) {
  const double fhat_y = phi_hat_hint != kInf ? phi_hat_hint
                                             : eval_phi_hat(inst, y, alpha);
  if (fhat_y == kInf) {
    throw std::invalid_argument("gcg_step: infeasible lifted point");
  }
  const LiftedGradient grad = grad_f_hat(inst, y);
  const double dtil = ctx.d_tilde(fhat_y);

  const Vec p1 = g_part_lmo(inst.nonsmooth, grad.g1, y.y1, dtil);
  const Vec p2 = inst.outer.geometry.lmo(grad.g2, alpha);

  double gap = grad.g1.dot(y.y1 - p1) + grad.g2.dot(y.y2 - p2);
  if (!inst.nonsmooth.is_zero) {
    gap += inst.nonsmooth.evaluate(y.y1) - inst.nonsmooth.evaluate(p1);
  }
  gap = clamp_roundoff(gap, 1e-9, "gcg surrogate gap");

  StepDetail d;
  d.phi_hat_before = fhat_y;
  d.d_tilde = dtil;
  d.out.measure = gap;
  const double dist2 = (p1 - y.y1).squaredNorm() + (p2 - y.y2).squaredNorm();
  if (gap <= 0.0 || dist2 == 0.0) {
    d.out.next = y;
    d.out.next.alpha_tag = alpha;
    d.out.decrease = 0.0;
    d.phi_hat_after = fhat_y;
    return d;
  }
  const double eta =
      std::min(1.0, gap / (grad.smooth_lipschitz * dist2));
  d.out.next.y1 = y.y1 + eta * (p1 - y.y1);
  d.out.next.y2 = y.y2 + eta * (p2 - y.y2);
  d.out.next.alpha_tag = alpha;
  d.phi_hat_after = eval_phi_hat(inst, d.out.next, alpha);
  d.out.decrease = fhat_y - d.phi_hat_after;
  return d;
}

inline StepDetail pg_step_detail(const BilevelInstance& inst,
                                 const LiftedPoint& y, double alpha,
                                 const DiameterContext& ctx,
                                 double phi_hat_hint = kInf) {
  const double fhat_y = phi_hat_hint != kInf ? phi_hat_hint
                                             : eval_phi_hat(inst, y, alpha);
  if (fhat_y == kInf) {
    throw std::invalid_argument("pg_step: infeasible lifted point");
  }
  const double lf = inst.smooth.lipschitz_grad;
  const double lift_l = lf + 2.0;
  const Vec gf = inst.smooth.gradient(y.y1);

  StepDetail d;
  d.phi_hat_before = fhat_y;
  d.out.next.y1 = inst.nonsmooth.prox(
      y.y1 - (gf + 2.0 * (y.y1 - y.y2)) / lift_l, 1.0 / lift_l);
  d.out.next.y2 =
      inst.outer.geometry.project((lf * y.y2 + 2.0 * y.y1) / lift_l, alpha);
  d.out.next.alpha_tag = alpha;
  d.phi_hat_after = eval_phi_hat(inst, d.out.next, alpha);

  const double zeta =
      clamp_roundoff(fhat_y - d.phi_hat_after, 1e-9, "pg decrease");
  d.out.decrease = zeta;
  d.d_tilde = ctx.d_tilde(fhat_y);
  d.out.measure =
      2.0 * std::max(zeta, d.d_tilde * std::sqrt(lift_l * zeta / 2.0));
  return d;
}

}  // namespace detail

inline StepOutcome gcg_step(const BilevelInstance& inst, const LiftedPoint& y,
                            double alpha, const DiameterContext& ctx) {
  return detail::gcg_step_detail(inst, y, alpha, ctx).out;
}

inline StepOutcome pg_step(const BilevelInstance& inst, const LiftedPoint& y,
                           double alpha, const DiameterContext& ctx) {
  return detail::pg_step_detail(inst, y, alpha, ctx).out;
}

// Property (i) of a continuous optimality measure: the measure dominates the
// suboptimality phi_hat(y) - h(alpha). h_alpha_ref comes from the reference
// oracle in the benchmark harness.
inline bool surrogate_gap_lower_bound_check(const BilevelInstance& inst,
                                            const LiftedPoint& y, double alpha,
                                            double h_alpha_ref,
                                            double measure) {
  return measure >= eval_phi_hat(inst, y, alpha) - h_alpha_ref - 1e-6;
}

// ---------------------------------------------------------------------------
// Un-lifted steps for the smooth-inner special case (g = 0): the composite is
// f + indicator(Lev(alpha)), whose domain diameter is the level set's.

struct SmoothStepOutcome {
  Vec next;
  double measure = 0.0;
  double decrease = 0.0;
};

namespace detail {

struct SmoothStepDetail {
  SmoothStepOutcome out;
  double f_before = 0.0;
  double f_after = 0.0;
};

inline SmoothStepDetail gcg_step_smooth_detail(const BilevelInstance& inst,
                                               const Vec& x, double alpha,
                                               double f_hint = kInf) {
  const double fx = f_hint != kInf ? f_hint : inst.smooth.value(x);
  Vec gf = inst.smooth.gradient(x);
  const Vec p = inst.outer.geometry.lmo(gf, alpha);
  const double gap = clamp_roundoff(gf.dot(x - p), 1e-9, "gcg smooth gap");
  SmoothStepDetail d;
  d.f_before = fx;
  d.out.measure = gap;
  const double dist2 = (p - x).squaredNorm();
  if (gap <= 0.0 || dist2 == 0.0) {
    d.out.next = x;
    d.f_after = fx;
    return d;
  }
  const double lf = std::max(inst.smooth.lipschitz_grad, 1e-300);
  const double eta = std::min(1.0, gap / (lf * dist2));
  d.out.next = x + eta * (p - x);
  d.f_after = inst.smooth.value(d.out.next);
  d.out.decrease = fx - d.f_after;
  return d;
}

inline SmoothStepDetail pg_step_smooth_detail(const BilevelInstance& inst,
                                              const Vec& x, double alpha,
                                              double f_hint = kInf) {
  const double fx = f_hint != kInf ? f_hint : inst.smooth.value(x);
  const double lf = std::max(inst.smooth.lipschitz_grad, 1e-300);
  Vec gf = inst.smooth.gradient(x);
  SmoothStepDetail d;
  d.f_before = fx;
  d.out.next = inst.outer.geometry.project(x - gf / lf, alpha);
  d.f_after = inst.smooth.value(d.out.next);
  const double zeta =
      clamp_roundoff(fx - d.f_after, 1e-9, "pg smooth decrease");
  d.out.decrease = zeta;
  const double dlev = inst.outer.geometry.diameter(alpha);
  d.out.measure = 2.0 * std::max(zeta, dlev * std::sqrt(lf * zeta / 2.0));
  return d;
}

}  // namespace detail

inline SmoothStepOutcome gcg_step_smooth(const BilevelInstance& inst,
                                         const Vec& x, double alpha) {
  return detail::gcg_step_smooth_detail(inst, x, alpha).out;
}

inline SmoothStepOutcome pg_step_smooth(const BilevelInstance& inst,
                                        const Vec& x, double alpha) {
  return detail::pg_step_smooth_detail(inst, x, alpha).out;
}

}  // namespace italex
