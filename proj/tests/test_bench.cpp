#include <catch2/catch_amalgamated.hpp>

#include "italex/bench.hpp"
#include "toy.hpp"

using namespace italex;
using Catch::Approx;

TEST_CASE("generator is deterministic and hits the condition target") {
  GeneratorSpec gen;
  gen.n = 12;
  gen.m = 8;
  gen.k_sparse = 3;
  gen.sigma = 1e-3;
  gen.cond = 25.0;
  const InstanceSpec a = generate_lsq_spec(gen, 99);
  const InstanceSpec b = generate_lsq_spec(gen, 99);
  REQUIRE(instance_to_json(a).dump() == instance_to_json(b).dump());
  const InstanceSpec c = generate_lsq_spec(gen, 100);
  REQUIRE(instance_to_json(a).dump() != instance_to_json(c).dump());

  Eigen::JacobiSVD<Mat> svd(a.A);
  const double cond =
      svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
  REQUIRE(cond == Approx(25.0).epsilon(0.05));
}

TEST_CASE("identity hook produces the consistent singleton instance") {
  GeneratorSpec gen;
  gen.n = 6;
  gen.m = 6;
  gen.k_sparse = 2;
  gen.sigma = 0.0;
  gen.identity_A = true;
  const InstanceSpec spec = generate_lsq_spec(gen, 7);
  REQUIRE(spec.phi_star);
  REQUIRE(*spec.phi_star == 0.0);
  REQUIRE(spec.x_star);
  const auto inst = build_instance(spec);
  REQUIRE(eval_phi(inst, *spec.x_star) == Approx(0.0).margin(1e-20));
  REQUIRE(*spec.omega_star ==
          Approx(inst.outer.evaluate(*spec.x_star)));
  // x_star has exactly k_sparse nonzeros
  int nnz = 0;
  for (int i = 0; i < 6; ++i) nnz += ((*spec.x_star)[i] != 0.0);
  REQUIRE(nnz == 2);
}

TEST_CASE("rank-deficient systems have non-unique minimizers") {
  GeneratorSpec gen;
  gen.n = 20;
  gen.m = 10;
  gen.k_sparse = 4;
  gen.sigma = 1e-3;
  const InstanceSpec spec = generate_lsq_spec(gen, 11);
  const auto inst = build_instance(spec);
  Eigen::JacobiSVD<Mat> svd(spec.A, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Vec least_norm = svd.solve(spec.b);
  const Vec null_dir = svd.matrixV().col(19);  // rank is 10
  REQUIRE((spec.A * null_dir).norm() < 1e-10);
  const Vec other = least_norm + 2.0 * null_dir;
  REQUIRE(std::abs(eval_phi(inst, least_norm) - eval_phi(inst, other)) <
          1e-10);
}

TEST_CASE("reference phi* is exact on analytic instances") {
  InstanceSpec s;
  s.A = Mat::Identity(2, 2);
  s.b = Vec::Constant(2, 1.0);
  REQUIRE(reference_phi_star(build_instance(s), 1e-8) ==
          Approx(0.0).margin(1e-12));
  REQUIRE(reference_phi_star(toy::one_dim(), 1e-8) ==
          Approx(0.0).margin(1e-10));
}

TEST_CASE("reference phi* is self-consistent across starts") {
  const auto inst = generate_lsq(20, 12, 5, 1e-2, 31);
  const double tol = 1e-7;
  const double v1 = reference_phi_star(inst, tol);
  const auto [x2, v2] = detail::fista_reference(
      inst, Vec::Constant(20, 0.5), tol * 1e-2, 2000000);
  REQUIRE(std::abs(v1 - v2) <= 2.0 * tol);
}

TEST_CASE("reference h matches the toy closed form and its shape") {
  const auto inst = toy::one_dim();
  REQUIRE(reference_h(inst, 1.0, 1e-7) == Approx(0.5).margin(1e-6));
  REQUIRE(reference_h(inst, 2.0, 1e-7) == Approx(0.0).margin(1e-6));
  REQUIRE(reference_h(inst, 3.0, 1e-7) == Approx(0.0).margin(1e-6));
  // nonincreasing and convex on a grid
  std::vector<double> alphas = {0.0, 0.4, 0.8, 1.2, 1.6, 2.0};
  std::vector<double> h;
  for (double a : alphas) h.push_back(reference_h(inst, a, 1e-7));
  for (std::size_t i = 1; i < h.size(); ++i) {
    REQUIRE(h[i] <= h[i - 1] + 1e-8);
  }
  for (std::size_t i = 1; i + 1 < h.size(); ++i) {
    REQUIRE(h[i] <= 0.5 * (h[i - 1] + h[i + 1]) + 1e-6);
  }
  // closed form of the toy: h(alpha) = (2 - alpha)^2 / 2 below omega*
  REQUIRE(h[1] == Approx(0.5 * 1.6 * 1.6).margin(1e-6));
}

TEST_CASE("reference omega* approximates the bilevel outer value") {
  REQUIRE(reference_omega_star(toy::one_dim(), 1e-6) ==
          Approx(2.0).margin(2e-3));

  GeneratorSpec gen;
  gen.n = 6;
  gen.m = 6;
  gen.k_sparse = 2;
  gen.sigma = 0.0;
  gen.identity_A = true;
  const InstanceSpec spec = generate_lsq_spec(gen, 7);
  const auto inst = build_instance(spec);
  REQUIRE(reference_omega_star(inst, 1e-6) ==
          Approx(*spec.omega_star).margin(1e-3));

  InstanceSpec bad;
  bad.A = Mat::Identity(2, 2);
  bad.b = Vec::Constant(2, 1.0);
  bad.omega.kind = "qnorm";
  bad.omega.Q = Mat::Identity(2, 2);
  REQUIRE_THROWS_AS(reference_omega_star(build_instance(bad), 1e-6),
                    UnsupportedConfiguration);
}

TEST_CASE("regularization path is monotone in lambda") {
  const auto inst = generate_lsq(12, 8, 3, 1e-3, 55);
  const auto pts =
      regularization_path(inst, default_lambda_ladder(inst, 12), 1e-6);
  REQUIRE(pts.size() == 12);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    REQUIRE(pts[i].lambda < pts[i - 1].lambda);
    REQUIRE(pts[i].phi_gap <= pts[i - 1].phi_gap + 1e-9);
    REQUIRE(pts[i].omega >= pts[i - 1].omega - 1e-9);
  }
  // heavy regularization kills x, light regularization closes the phi gap
  REQUIRE(pts.back().phi_gap <= 1e-4);
  REQUIRE(pts.front().omega <= pts.back().omega);
}

TEST_CASE("metrics follow the last-snapshot-before-t convention") {
  SolveReport a;
  a.method = "m1";
  a.instance_id = 0;
  a.snapshots = {{0.0, 0, 10.0, 4.0}, {0.0, 100, 6.0, 2.0},
                 {0.0, 200, 5.0, 1.0}};
  a.best_phi = 5.0;
  a.best_x = Vec::Constant(2, 1.0);  // norm^2 = 2
  SolveReport b = a;
  b.method = "m2";
  b.snapshots = {{0.0, 0, 8.0, 8.0}, {0.0, 150, 7.0, 6.0}};
  b.best_phi = 7.0;
  const std::vector<double> grid = {100.0, 200.0};
  const auto ms = compute_metrics({a, b}, {1.0}, grid, false);
  REQUIRE(ms.methods == std::vector<std::string>{"m1", "m2"});
  // omega_max over all runs/snapshots of instance 0 is 8
  // x* is the min-phi iterate: from run a, norm^2 = 2
  REQUIRE(ms.delta_phi[0][0] == Approx((6.0 - 1.0) / 2.0));
  REQUIRE(ms.delta_phi[1][0] == Approx((8.0 - 1.0) / 2.0));
  REQUIRE(ms.delta_phi[1][1] == Approx((7.0 - 1.0) / 2.0));
  REQUIRE(ms.delta_omega[0][0] == Approx(1.0 - 2.0 / 8.0));
  REQUIRE(ms.delta_omega[1][1] == Approx(1.0 - 6.0 / 8.0));
  REQUIRE_THROWS_AS(compute_metrics({}, {}, grid, false),
                    std::invalid_argument);
}

TEST_CASE("all methods at phi* give a zero phi gap") {
  SolveReport a;
  a.method = "m";
  a.instance_id = 0;
  a.snapshots = {{0.0, 0, 3.0, 1.0}};
  a.best_phi = 3.0;
  a.best_x = Vec::Constant(1, 2.0);
  const auto ms = compute_metrics({a}, {3.0}, {10.0}, false);
  REQUIRE(ms.delta_phi[0][0] == Approx(0.0).margin(1e-15));
  // a single method/snapshot is its own omega max
  REQUIRE(ms.delta_omega[0][0] == Approx(0.0).margin(1e-15));
}

TEST_CASE("experiment smoke run and determinism") {
  ExperimentConfig cfg;
  cfg.generator.n = 10;
  cfg.generator.m = 6;
  cfg.generator.k_sparse = 3;
  cfg.generator.sigma = 1e-3;
  cfg.instances = 2;
  cfg.seed = 5;
  cfg.snapshot_period = 20;
  cfg.grid_points = 10;
  cfg.budget.kind = BudgetSpec::Kind::iterations;
  cfg.budget.value = 3000;
  MethodConfig pg;
  pg.name = "italex-pg";
  pg.eps = 1e-5;
  MethodConfig gcg;
  gcg.name = "italex-gcg";
  gcg.eps = 1e-5;
  cfg.methods = {pg, gcg};

  const auto b1 = run_experiment(cfg);
  const auto b2 = run_experiment(cfg);
  REQUIRE(metrics_to_csv(b1.metrics) == metrics_to_csv(b2.metrics));
  REQUIRE(b1.runs.size() == 4);
  // full results agree byte-for-byte once timestamps are stripped
  auto strip_tms = [](json j) {
    for (auto& run : j.at("runs")) {
      for (auto& snap : run.at("snapshots")) snap["t_ms"] = 0.0;
    }
    return j;
  };
  REQUIRE(strip_tms(experiment_results_json(b1)).dump() ==
          strip_tms(experiment_results_json(b2)).dump());
  // metric ranges: phi gaps nonnegative up to reference tolerance,
  // omega improvements never exceed 1
  for (std::size_t mi = 0; mi < b1.metrics.methods.size(); ++mi) {
    for (std::size_t gi = 0; gi < b1.metrics.grid.size(); ++gi) {
      REQUIRE(b1.metrics.delta_phi[mi][gi] >= -1e-7);
      REQUIRE(b1.metrics.delta_omega[mi][gi] <= 1.0 + 1e-12);
    }
  }
  // descent methods: the phi series is nonincreasing over the grid
  for (std::size_t mi = 0; mi < b1.metrics.methods.size(); ++mi) {
    for (std::size_t gi = 1; gi < b1.metrics.grid.size(); ++gi) {
      REQUIRE(b1.metrics.delta_phi[mi][gi] <=
              b1.metrics.delta_phi[mi][gi - 1] + 1e-7);
    }
  }
  // parallel instances produce identical results
  ExperimentConfig par = cfg;
  par.jobs = 2;
  const auto b3 = run_experiment(par);
  REQUIRE(metrics_to_csv(b3.metrics) == metrics_to_csv(b1.metrics));
}

TEST_CASE("feasibility decays like 1/t along a full run") {
  const auto inst = generate_lsq(20, 14, 5, 1e-2, 77);
  const double phi_star = reference_phi_star(inst, 1e-9);
  std::vector<double> gaps;
  SolveOptions opts;
  opts.step_callback = [&](const StepEvent& ev) {
    gaps.push_back(std::max(ev.phi_after - phi_star, 1e-16));
  };
  const auto start = default_start(inst);
  italex_ct(inst, 1e-6, 0.1, start.alpha0, start.x0, start.z0, start.u0,
            StepKind::pg, opts);
  REQUIRE(gaps.size() > 1000);
  std::vector<double> tg;
  for (std::size_t t = gaps.size() / 2; t < gaps.size(); ++t) {
    tg.push_back(static_cast<double>(t + 1) * gaps[t]);
  }
  std::vector<double> sorted = tg;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double max = sorted.back();
  REQUIRE(max <= 3.0 * median);
}

TEST_CASE("h values along a real alpha trace are nonincreasing") {
  const auto inst = generate_lsq(8, 6, 3, 1e-3, 13);
  const auto start = default_start(inst);
  const auto rep = italex_ct(inst, 1e-4, 0.1, start.alpha0, start.x0,
                             start.z0, start.u0, StepKind::pg);
  REQUIRE(rep.alpha_trace.size() >= 2);
  const std::size_t stride = std::max<std::size_t>(
      1, rep.alpha_trace.size() / 6);
  double prev = kInf;
  for (std::size_t i = 0; i < rep.alpha_trace.size(); i += stride) {
    const double h = reference_h(inst, rep.alpha_trace[i], 1e-6);
    REQUIRE(h <= prev + 1e-5);
    prev = h;
  }
}

TEST_CASE("sparse-recovery benchmark reproduces the golden method ordering") {
  const char* dir = std::getenv("ITALEX_GOLDEN_DIR");
  if (!dir) SKIP("ITALEX_GOLDEN_DIR not set");
  std::ifstream in(std::string(dir) + "/bench_ordering.json");
  REQUIRE(in.good());
  const json golden = json::parse(in);
  const auto cfg = experiment_config_from_json(golden.at("config"));
  const auto bundle = run_experiment(cfg);
  // rank methods by final-grid delta_phi, best first
  std::vector<std::size_t> idx(bundle.metrics.methods.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const std::size_t last = bundle.metrics.grid.size() - 1;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return bundle.metrics.delta_phi[a][last] <
           bundle.metrics.delta_phi[b][last];
  });
  std::vector<std::string> order;
  for (std::size_t i : idx) order.push_back(bundle.metrics.methods[i]);
  const auto expected = golden.at("order").get<std::vector<std::string>>();
  REQUIRE(order == expected);
}

TEST_CASE("experiment config parses from JSON") {
  const auto j = json::parse(R"({
    "generator": {"n": 8, "m": 6, "k_sparse": 2, "sigma": 0.001,
                  "omega": {"kind": "elastic_net", "rho": 0.1}},
    "instances": 3,
    "seed": 42,
    "budget": {"kind": "iterations", "value": 500},
    "methods": [{"name": "italex-pg", "eps": 1e-4},
                {"name": "bigsam", "delta": 0.5}]
  })");
  const auto cfg = experiment_config_from_json(j);
  REQUIRE(cfg.generator.n == 8);
  REQUIRE(cfg.generator.omega.kind == "elastic_net");
  REQUIRE(cfg.instances == 3);
  REQUIRE(cfg.methods.size() == 2);
  REQUIRE(cfg.methods[1].baseline.huber_delta == Approx(0.5));
  REQUIRE_THROWS_AS(experiment_config_from_json(json::parse(
                        R"({"generator": {}, "methods": [],
                            "budget": {"kind": "minutes"}})")),
                    std::invalid_argument);
}
