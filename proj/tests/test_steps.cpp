#include <catch2/catch_amalgamated.hpp>

#include "italex/rng.hpp"
#include "italex/steps.hpp"
#include "toy.hpp"

using namespace italex;
using Catch::Approx;

namespace {

DiameterContext toy_ctx(const BilevelInstance& inst, double alpha,
                        double phi_bar = 0.0, double eps = 1.0) {
  return make_diameter_context(inst, alpha, phi_bar, eps);
}

}  // namespace

TEST_CASE("gcg step on the toy instance") {
  const auto inst = toy::one_dim();
  const auto ctx = toy_ctx(inst, 1.0);
  REQUIRE(ctx.d_alpha == Approx(8.0));  // box diameter 6 + level diameter 2

  const auto out = gcg_step(inst, toy::lift(0, 0.5, 1), 1.0, ctx);
  REQUIRE(out.measure == Approx(16.5));
  const double eta = 16.5 / (4.0 * 11.25);
  REQUIRE(out.next.y1[0] == Approx(0.0 + eta * 3.0));
  REQUIRE(out.next.y2[0] == Approx(0.5 + eta * (-1.5)));
  REQUIRE(out.decrease >= 0.0);

  // minimizer of phi_hat^1 is a zero-gap fixed point
  const auto fixed = gcg_step(inst, toy::lift(1.5, 1, 1), 1.0, ctx);
  REQUIRE(fixed.measure == Approx(0.0).margin(1e-9));
  REQUIRE((fixed.next.y1 - Vec::Constant(1, 1.5)).norm() < 1e-6);
}

TEST_CASE("pg step on the toy instance") {
  const auto inst = toy::one_dim();
  const auto ctx = toy_ctx(inst, 1.0);
  const auto out = pg_step(inst, toy::lift(0, 0, 1), 1.0, ctx);
  REQUIRE(out.next.y1[0] == Approx(1.0));
  REQUIRE(out.next.y2[0] == Approx(0.0).margin(1e-14));
  REQUIRE(out.decrease == Approx(2.0));
  REQUIRE(out.measure >= 2.0 * out.decrease - 1e-12);

  const auto fixed = pg_step(inst, toy::lift(1.5, 1, 1), 1.0, ctx);
  REQUIRE(fixed.decrease == Approx(0.0).margin(1e-12));
  REQUIRE(fixed.measure == Approx(0.0).margin(1e-9));
  REQUIRE((fixed.next.y1 - Vec::Constant(1, 1.5)).norm() < 1e-6);
}

TEST_CASE("pg step with unbounded dom(g) uses the root branch of d_tilde") {
  const auto inst = toy::one_dim_smooth();
  const auto ctx = toy_ctx(inst, 1.0, 0.0, 1.0);
  REQUIRE(ctx.d_alpha == kInf);
  const double dt = ctx.d_tilde(4.0);
  REQUIRE(dt == Approx(std::sqrt(6.0 * 4.5 + 16.0)));
  REQUIRE(dt < kInf);
  const auto out = pg_step(inst, toy::lift(0, 0, 1), 1.0, ctx);
  REQUIRE(std::isfinite(out.measure));
  REQUIRE(out.decrease >= 0.0);
}

TEST_CASE("d_tilde never exceeds d_alpha") {
  const auto inst = toy::one_dim();
  CounterRng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto ctx = toy_ctx(inst, rng.uniform(0.1, 3.0),
                             rng.uniform(-1.0, 1.0), rng.uniform(0.01, 2.0));
    REQUIRE(ctx.d_tilde(rng.uniform(0.0, 30.0)) <= ctx.d_alpha + 1e-12);
  }
}

TEST_CASE("sufficient decrease inequalities hold along random steps") {
  const auto inst = toy::one_dim();
  CounterRng rng(5);
  const double lift_l = inst.smooth.lipschitz_grad + 2.0;
  for (int i = 0; i < 200; ++i) {
    const double alpha = rng.uniform(0.2, 2.0);
    const auto ctx = toy_ctx(inst, alpha, 0.0, 1.0);
    LiftedPoint y = toy::lift(rng.uniform(-3, 3),
                              rng.uniform(-alpha, alpha), alpha);
    const auto gcg = gcg_step(inst, y, alpha, ctx);
    const double s = gcg.measure;
    REQUIRE(gcg.decrease >=
            0.5 * std::min(s, s * s / (lift_l * ctx.d_alpha * ctx.d_alpha)) -
                1e-9);
    REQUIRE(inst.outer.geometry.contains(gcg.next.y2, alpha));

    const auto pg = pg_step(inst, y, alpha, ctx);
    const double st = pg.measure;
    const double dt = ctx.d_tilde(eval_phi_hat(inst, y, alpha));
    REQUIRE(pg.decrease >=
            std::min(0.5 * st, st * st / (2.0 * lift_l * dt * dt)) - 1e-9);
    REQUIRE(inst.outer.geometry.contains(pg.next.y2, alpha));
  }
}

TEST_CASE("near-zero measure pins the iterate") {
  const auto inst = toy::one_dim();
  const auto ctx = toy_ctx(inst, 1.0);
  for (StepKind kind : {StepKind::gcg, StepKind::pg}) {
    const LiftedPoint y = toy::lift(1.5, 1, 1);
    const auto out = kind == StepKind::gcg ? gcg_step(inst, y, 1.0, ctx)
                                           : pg_step(inst, y, 1.0, ctx);
    if (out.measure <= 1e-12) {
      const double moved = (out.next.y1 - y.y1).norm() +
                           (out.next.y2 - y.y2).norm();
      REQUIRE(moved <= 1e-6);
    }
  }
}

TEST_CASE("broken oracles raise numerical-inconsistency errors") {
  // A linear oracle that returns the worst vertex makes the surrogate gap
  // negative.
  auto inst = toy::one_dim();
  inst.nonsmooth.linear_oracle = [](const Vec& c) {
    Vec p(1);
    p[0] = c[0] >= 0.0 ? 3.0 : -3.0;
    return p;
  };
  const auto ctx = toy_ctx(inst, 1.0);
  REQUIRE_THROWS_AS(gcg_step(inst, toy::lift(0, 0.5, 1), 1.0, ctx),
                    NumericalInconsistency);

  // A wildly understated Lipschitz constant makes the prox step ascend.
  InstanceSpec s;
  s.A = Mat::Identity(1, 1) * 10.0;
  s.b = Vec::Constant(1, 2.0);
  s.g.kind = "box";
  s.g.lower = Vec::Constant(1, -3.0);
  s.g.upper = Vec::Constant(1, 3.0);
  s.omega.kind = "l1";
  s.lipschitz = 1.0;  // true value is 200
  const auto lying = build_instance(s);
  const auto ctx2 = toy_ctx(lying, 1.0);
  REQUIRE_THROWS_AS(pg_step(lying, toy::lift(3, 1, 1), 1.0, ctx2),
                    NumericalInconsistency);
}

TEST_CASE("missing linear oracle on a boxless domain is rejected") {
  auto inst = toy::one_dim();
  inst.nonsmooth.linear_oracle = nullptr;
  inst.nonsmooth.domain = NonsmoothObjective::Domain::box;
  const auto ctx = toy_ctx(inst, 1.0);
  REQUIRE_THROWS_AS(gcg_step(inst, toy::lift(0, 0, 1), 1.0, ctx),
                    UnsupportedConfiguration);
}

TEST_CASE("gcg ball restriction covers g = 0 and nonneg domains") {
  const auto smooth = toy::one_dim_smooth();
  const auto ctx = toy_ctx(smooth, 1.0, 0.0, 1.0);
  const auto out = gcg_step(smooth, toy::lift(0, 0, 1), 1.0, ctx);
  REQUIRE(out.measure > 0.0);
  REQUIRE(out.decrease >= 0.0);

  InstanceSpec s;
  s.A = Mat::Identity(2, 2);
  s.b = Vec::Constant(2, 1.0);
  s.g.kind = "nonneg";
  s.omega.kind = "l1";
  const auto nn = build_instance(s);
  const auto ctx2 = toy_ctx(nn, 0.5, 0.0, 1.0);
  LiftedPoint y{Vec::Zero(2), Vec::Zero(2), 0.5};
  const auto step = gcg_step(nn, y, 0.5, ctx2);
  REQUIRE(step.next.y1.minCoeff() >= 0.0);
  REQUIRE(step.decrease >= 0.0);
}

TEST_CASE("surrogate gap lower bound check") {
  const auto inst = toy::one_dim();
  // h(1) = 0.5 from the analytic lifted minimizer (1.5, 1)
  REQUIRE(surrogate_gap_lower_bound_check(inst, toy::lift(0, 0.5, 1), 1.0,
                                          0.5, 16.5));
  REQUIRE(surrogate_gap_lower_bound_check(inst, toy::lift(1.5, 1, 1), 1.0,
                                          0.5, 0.0));
  CounterRng rng(6);
  const auto ctx = toy_ctx(inst, 1.0, 0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    LiftedPoint y = toy::lift(rng.uniform(-3, 3), rng.uniform(-1, 1), 1.0);
    const auto pg = pg_step(inst, y, 1.0, ctx);
    REQUIRE(surrogate_gap_lower_bound_check(inst, y, 1.0, 0.5, pg.measure));
    const auto gc = gcg_step(inst, y, 1.0, ctx);
    REQUIRE(surrogate_gap_lower_bound_check(inst, y, 1.0, 0.5, gc.measure));
  }
}

TEST_CASE("smooth steps on the unlifted toy") {
  const auto inst = toy::one_dim_smooth();
  const Vec x0 = Vec::Zero(1);
  const auto pg = pg_step_smooth(inst, x0, 1.0);
  REQUIRE(pg.next[0] == Approx(1.0));
  REQUIRE(pg.decrease == Approx(3.0));
  REQUIRE(pg.measure >= pg.decrease);

  const auto gcg = gcg_step_smooth(inst, x0, 1.0);
  REQUIRE(gcg.measure == Approx(4.0));
  REQUIRE(gcg.next[0] == Approx(1.0));
  REQUIRE(gcg.decrease == Approx(3.0));

  // fixed point at the constrained minimizer x = 1
  const auto fixed = pg_step_smooth(inst, Vec::Constant(1, 1.0), 1.0);
  REQUIRE(fixed.measure == Approx(0.0).margin(1e-9));
}
