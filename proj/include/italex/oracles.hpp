#pragma once

#include <functional>
#include <utility>

#include "italex/steps.hpp"

namespace italex {

// Result of one approximation-oracle call: either a certified gap
// rho >= eps_tol / 2 at the returned point, or rho = 0 together with an
// eps_tol-optimal lifted point.
struct OracleOutcome {
  double rho = 0.0;
  LiftedPoint y;
  long inner_iterations = 0;
};

// The step cap ran out with neither stopping condition met. Usually means
// phi_bar < phi* or a misconfigured tolerance; carries the last iterate so
// callers under an external budget can resume or report it.
class OracleBudgetExhausted : public std::runtime_error {
 public:
  OracleBudgetExhausted(LiftedPoint last_iterate, long steps)
      : std::runtime_error(
            "approximation oracle exhausted its step budget without meeting "
            "either stopping condition"),
        last(std::move(last_iterate)),
        steps_used(steps) {}

  LiftedPoint last;
  long steps_used = 0;
};

// Per-step instrumentation record; consumed by the trace recorder and the
// sufficient-decrease tests.
struct StepEvent {
  StepKind kind = StepKind::pg;
  double alpha = 0.0;
  double measure = 0.0;
  double decrease = 0.0;
  double phi_hat_before = 0.0;
  double phi_hat_after = 0.0;
  double d_alpha = 0.0;
  double d_tilde = 0.0;
  double smooth_lipschitz = 0.0;
  const Vec* x_after = nullptr;  // y1 (resp. x) of the produced iterate
  double phi_after = 0.0;        // phi(x_after)
};

using StepCallback = std::function<void(const StepEvent&)>;

// Measure-based approximation oracle: iterate the chosen descent step on
// phi_hat^alpha, exit with rho = 0 as soon as phi_hat(y) - phi_bar <= eps_tol,
// or with rho = phi_hat(y) - phi_bar - measure(y) as soon as that exceeds
// eps_tol / 2. The rho = 0 exit is checked first; when both conditions hold
// the early feasibility exit wins (a deterministic choice).
inline OracleOutcome approximation_oracle(const BilevelInstance& inst,
                                          LiftedPoint y0, double alpha,
                                          double phi_bar, double eps_tol,
                                          StepKind step, long max_steps,
                                          const StepCallback& on_step = {}) {
  if (eps_tol <= 0.0) {
    throw std::invalid_argument("approximation_oracle: eps_tol must be > 0");
  }
  // d_tilde's slack term is eps/2 with eps the round tolerance; the oracle
  // runs at eps_tol = eps/2, hence ctx.eps = 2 * eps_tol.
  const DiameterContext ctx =
      make_diameter_context(inst, alpha, phi_bar, 2.0 * eps_tol);
  LiftedPoint y = std::move(y0);
  y.alpha_tag = alpha;
  double phi_hat_hint = kInf;
  for (long j = 0; j < max_steps; ++j) {
    const detail::StepDetail d =
        step == StepKind::gcg
            ? detail::gcg_step_detail(inst, y, alpha, ctx, phi_hat_hint)
            : detail::pg_step_detail(inst, y, alpha, ctx, phi_hat_hint);
    if (on_step) {
      StepEvent ev;
      ev.kind = step;
      ev.alpha = alpha;
      ev.measure = d.out.measure;
      ev.decrease = d.out.decrease;
      ev.phi_hat_before = d.phi_hat_before;
      ev.phi_hat_after = d.phi_hat_after;
      ev.d_alpha = ctx.d_alpha;
      ev.d_tilde = d.d_tilde;
      ev.smooth_lipschitz = inst.smooth.lipschitz_grad + 2.0;
      ev.x_after = &d.out.next.y1;
      ev.phi_after =
          d.phi_hat_after - (d.out.next.y1 - d.out.next.y2).squaredNorm();
      on_step(ev);
    }
    if (d.phi_hat_before - phi_bar <= eps_tol) {
      return {0.0, y, j + 1};
    }
    const double rho = d.phi_hat_before - phi_bar - d.out.measure;
    if (rho > 0.5 * eps_tol) {
      return {rho, y, j + 1};
    }
    y = d.out.next;
    phi_hat_hint = d.phi_hat_after;
  }
  throw OracleBudgetExhausted(y, max_steps);
}

// Un-lifted oracle for the smooth-inner case (g = 0); same contract with
// phi_hat^alpha(x) = f(x) + indicator(Lev(alpha)).
struct SmoothOracleOutcome {
  double rho = 0.0;
  Vec x;
  long inner_iterations = 0;
};

inline SmoothOracleOutcome approximation_oracle_smooth(
    const BilevelInstance& inst, Vec x0, double alpha, double phi_bar,
    double eps_tol, StepKind step, long max_steps,
    const StepCallback& on_step = {}) {
  if (eps_tol <= 0.0) {
    throw std::invalid_argument(
        "approximation_oracle_smooth: eps_tol must be > 0");
  }
  if (!inst.nonsmooth.is_zero) {
    throw UnsupportedConfiguration(
        "approximation_oracle_smooth: inner objective must be smooth (g = 0)");
  }
  Vec x = std::move(x0);
  double f_hint = kInf;
  for (long j = 0; j < max_steps; ++j) {
    const detail::SmoothStepDetail d =
        step == StepKind::gcg
            ? detail::gcg_step_smooth_detail(inst, x, alpha, f_hint)
            : detail::pg_step_smooth_detail(inst, x, alpha, f_hint);
    if (on_step) {
      StepEvent ev;
      ev.kind = step;
      ev.alpha = alpha;
      ev.measure = d.out.measure;
      ev.decrease = d.out.decrease;
      ev.phi_hat_before = d.f_before;
      ev.phi_hat_after = d.f_after;
      ev.d_alpha = inst.outer.geometry.diameter(alpha);
      ev.d_tilde = ev.d_alpha;
      ev.smooth_lipschitz = inst.smooth.lipschitz_grad;
      ev.x_after = &d.out.next;
      ev.phi_after = d.f_after;
      on_step(ev);
    }
    if (d.f_before - phi_bar <= eps_tol) {
      return {0.0, x, j + 1};
    }
    const double rho = d.f_before - phi_bar - d.out.measure;
    if (rho > 0.5 * eps_tol) {
      return {rho, x, j + 1};
    }
    x = d.out.next;
    f_hint = d.f_after;
  }
  LiftedPoint last;
  last.y1 = x;
  last.y2 = x;
  last.alpha_tag = alpha;
  throw OracleBudgetExhausted(std::move(last), max_steps);
}

// Level increase certified by a kappa-power gamma error bound:
// beta = alpha + rho^{kappa/2} / gamma never overshoots omega* as long as
// 0 < rho <= h(alpha) - phi_bar and phi_bar >= phi*.
inline double expansion_oracle(double alpha, double rho, double kappa,
                               double gamma) {
  if (rho <= 0.0) {
    throw std::invalid_argument("expansion_oracle: rho must be > 0");
  }
  if (kappa <= 0.0 || kappa > 2.0 || gamma <= 0.0) {
    throw std::invalid_argument("expansion_oracle: bad error-bound constants");
  }
  return alpha + std::pow(rho, 0.5 * kappa) / gamma;
}

// Smooth-inner variant: with g = 0 the descent lemma strengthens the
// admissible increase to (2 rho / L_f)^{kappa/2} / gamma.
inline double expansion_oracle_smooth(double alpha, double rho, double kappa,
                                      double gamma, double lipschitz_f) {
  if (rho <= 0.0) {
    throw std::invalid_argument("expansion_oracle_smooth: rho must be > 0");
  }
  if (lipschitz_f <= 0.0) {
    throw std::invalid_argument("expansion_oracle_smooth: L_f must be > 0");
  }
  if (kappa <= 0.0 || kappa > 2.0 || gamma <= 0.0) {
    throw std::invalid_argument(
        "expansion_oracle_smooth: bad error-bound constants");
  }
  return alpha + std::pow(2.0 * rho / lipschitz_f, 0.5 * kappa) / gamma;
}

}  // namespace italex
