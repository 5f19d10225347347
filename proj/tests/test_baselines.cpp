#include <catch2/catch_amalgamated.hpp>

#include "italex/baselines.hpp"
#include "italex/rng.hpp"
#include "italex/serialize.hpp"
#include "toy.hpp"

using namespace italex;
using Catch::Approx;

namespace {

// f = ||x - b||^2 with omega = x^T Q x (smooth, strongly convex outer).
BilevelInstance quadratic_outer_instance(int n, const Vec& b,
                                         const std::string& g_kind = "none") {
  InstanceSpec s;
  s.A = Mat::Identity(n, n);
  s.b = b;
  s.g.kind = g_kind;
  s.omega.kind = "qnorm";
  s.omega.Q = Mat::Identity(n, n);
  s.lipschitz = 2.0;
  return build_instance(s);
}

}  // namespace

TEST_CASE("huber smoothing gradient and value") {
  const auto sm = huber_smooth_outer(0.05, 1.0);
  Vec x(3);
  x << 0.5, 2.0, -3.0;
  const Vec g = sm.gradient(x);
  REQUIRE(g[0] == Approx(0.5 + 0.05));  // quadratic regime
  REQUIRE(g[1] == Approx(1.0 + 2.0 * 0.05 * 2.0));  // linear regime: sign
  REQUIRE(g[2] == Approx(-1.0 - 2.0 * 0.05 * 3.0));
  REQUIRE(sm.gradient(Vec::Zero(3)).norm() == 0.0);
  REQUIRE(sm.grad_lipschitz == Approx(1.0 / 1.0 + 0.1));
  REQUIRE_THROWS_AS(huber_smooth_outer(0.05, 0.0), std::invalid_argument);
}

TEST_CASE("huber gap stays below delta/2 per coordinate") {
  const double rho = 0.05, delta = 0.7;
  const auto sm = huber_smooth_outer(rho, delta);
  const auto omega = make_outer_elastic_net(4, rho, 1);
  CounterRng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec x = rng.uniform_vec(4, -3.0, 3.0);
    const double gap = std::abs(omega.evaluate(x) - sm.value(x));
    REQUIRE(gap <= 0.5 * delta * 4.0 + 1e-12);
  }
}

TEST_CASE("bigsam step endpoints and hand-computed blend") {
  const Vec b = Vec::Zero(2);
  const auto inst = quadratic_outer_instance(2, b);
  BaselineConfig cfg;

  // x = 0 is a fixed point of both operands
  REQUIRE(bigsam_step(inst, Vec::Zero(2), 5, cfg).norm() == 0.0);

  // k = 1 with c = 2 gives alpha_k = 1: a pure outer gradient step
  Vec x(2);
  x << 1.0, -2.0;
  const double s = 1.0 / inst.outer.grad_lipschitz;  // 1/2
  const Vec outer_step = x - s * inst.outer.gradient(x);
  REQUIRE((bigsam_step(inst, x, 1, cfg) - outer_step).norm() < 1e-14);

  // k = 4: alpha = 1/2, blend of outer and inner prox-gradient steps
  cfg.averaging_coeff = 2.0;
  Vec b2(2);
  b2 << 1.0, 1.0;
  const auto inst2 = quadratic_outer_instance(2, b2);
  const double t = 1.0 / inst2.smooth.lipschitz_grad;  // 1/2
  const Vec inner_step = x - t * inst2.smooth.gradient(x);
  const Vec expect = 0.5 * (x - s * inst2.outer.gradient(x)) +
                     0.5 * inner_step;
  REQUIRE((bigsam_step(inst2, x, 4, cfg) - expect).norm() < 1e-14);
}

TEST_CASE("bigsam requires a smooth or smoothable outer") {
  InstanceSpec s;
  s.A = Mat::Identity(2, 2);
  s.b = Vec::Constant(2, 1.0);
  s.omega.kind = "l1";
  BaselineConfig cfg;
  REQUIRE_THROWS_AS(bigsam_step(build_instance(s), Vec::Zero(2), 1, cfg),
                    UnsupportedConfiguration);
  // elastic net works through Huber smoothing
  s.omega.kind = "elastic_net";
  s.omega.rho = 0.05;
  REQUIRE_NOTHROW(bigsam_step(build_instance(s), Vec::Zero(2), 1, cfg));
}

TEST_CASE("irpg step reduces to plain prox-gradient at lambda = 0") {
  Vec b(2);
  b << 2.0, -1.0;
  const auto inst = quadratic_outer_instance(2, b, "nonneg");
  BaselineConfig cfg;
  cfg.method = BaselineConfig::Method::irpg;
  cfg.lambda0 = 1e-300;
  Vec x(2);
  x << 0.5, 0.5;
  const double t = 1.0 / inst.smooth.lipschitz_grad;
  const Vec plain = inst.nonsmooth.prox(x - t * inst.smooth.gradient(x), t);
  REQUIRE((irpg_step(inst, x, 1, cfg) - plain).norm() < 1e-12);
}

TEST_CASE("irpg fixed point of the regularized objective is unchanged") {
  Vec b(1);
  b << 3.0;
  const auto inst = quadratic_outer_instance(1, b);
  BaselineConfig cfg;
  cfg.method = BaselineConfig::Method::irpg;
  cfg.lambda0 = 0.5;
  // minimizer of (x-3)^2 + lambda x^2 at lambda = 0.5/1: x = 3/(1+0.5)
  Vec x(1);
  x << 3.0 / 1.5;
  REQUIRE((irpg_step(inst, x, 1, cfg) - x).norm() < 1e-12);
  // iterates stay feasible for dom(g)
  const auto nn = quadratic_outer_instance(1, b, "nonneg");
  Vec z = Vec::Constant(1, 0.2);
  for (int k = 1; k <= 50; ++k) {
    z = irpg_step(nn, z, k, cfg);
    REQUIRE(z.minCoeff() >= 0.0);
  }
}

TEST_CASE("irpg rejects nonsmooth outers") {
  InstanceSpec s;
  s.A = Mat::Identity(2, 2);
  s.b = Vec::Constant(2, 1.0);
  s.omega.kind = "elastic_net";
  BaselineConfig cfg;
  cfg.method = BaselineConfig::Method::irpg;
  REQUIRE_THROWS_AS(irpg_step(build_instance(s), Vec::Zero(2), 1, cfg),
                    UnsupportedConfiguration);
}

TEST_CASE("bigsam converges on the 1-D analytic bilevel instance") {
  // inner f = (x-2)^2 over the nonneg orthant, outer x^2: solution x = 2.
  Vec b(1);
  b << 2.0;
  const auto inst = quadratic_outer_instance(1, b, "nonneg");
  BaselineConfig cfg;
  SolveOptions opts;
  opts.snapshot_period = 1000;
  const auto rep = run_baseline(inst, cfg, 100000, Vec::Zero(1), opts);
  REQUIRE(rep.method == "bigsam");
  REQUIRE(rep.final_phi <= 1e-3);
  REQUIRE(std::abs(rep.final_omega - 4.0) <= 2e-2);
  REQUIRE(rep.step_iterations == 100000);
  REQUIRE(rep.snapshots.size() >= 100);
}
