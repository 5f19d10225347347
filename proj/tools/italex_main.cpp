// Command-line front end: solve a single instance, run benchmark
// experiments, validate level-set geometries, or emit a regularization path.
//
// Exit codes: 0 success, 2 configuration error, 3 solver budget exhausted,
// 4 unsupported method/geometry pairing.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "italex/bench.hpp"

namespace {

int log_level() {
  const char* env = std::getenv("ITALEX_LOG");
  if (!env) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

struct SolveArgs {
  std::string instance_path;
  std::string method = "italex-pg";
  double eps = 1e-4;
  double eps1 = 0.1;
  std::uint64_t seed = 0;
  std::string out = "report.json";
  double alpha0 = italex::kInf;  // unset marker
  long budget = 100000;          // baseline iteration budget
  long snapshot_period = 50;
};

int cmd_solve(const SolveArgs& a) {
  using namespace italex;
  const InstanceSpec spec = load_instance_spec(a.instance_path);
  const BilevelInstance inst = build_instance(spec);
  StartPoint start = default_start(inst);
  if (a.alpha0 != kInf) {
    start.alpha0 = a.alpha0;
    start.z0 = inst.outer.geometry.project(start.x0, a.alpha0);
  }
  SolveOptions opts;
  opts.snapshot_period = a.snapshot_period;
  SolveReport rep;
  if (a.method == "italex-pg" || a.method == "italex-gcg") {
    rep = italex_ct(inst, a.eps, a.eps1, start.alpha0, start.x0, start.z0,
                    start.u0,
                    a.method == "italex-gcg" ? StepKind::gcg : StepKind::pg,
                    opts);
  } else if (a.method == "italex-smooth") {
    rep = italex_smooth(inst, a.eps, a.eps1, start.alpha0, start.x0, start.u0,
                        StepKind::pg, opts);
  } else if (a.method == "bigsam" || a.method == "irpg") {
    BaselineConfig bc;
    bc.method = a.method == "bigsam" ? BaselineConfig::Method::bigsam
                                     : BaselineConfig::Method::irpg;
    rep = run_baseline(inst, bc, a.budget, start.x0, opts);
  } else {
    throw std::invalid_argument("unknown method: " + a.method);
  }
  std::ofstream out(a.out);
  if (!out) throw std::invalid_argument("cannot write report to " + a.out);
  out << report_to_json(rep).dump(1) << "\n";
  if (log_level() >= 1) {
    std::printf("phi=%.12g omega=%.12g alpha=%.12g N=%ld M=%ld\n",
                rep.final_phi, rep.final_omega, rep.alpha_final,
                rep.oracle_calls, rep.step_iterations);
  }
  return 0;
}

struct BenchArgs {
  std::string config_path;
  std::string out_dir = ".";
  int jobs = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double budget = 0.0;
};

int cmd_bench(const BenchArgs& a) {
  using namespace italex;
  std::ifstream in(a.config_path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + a.config_path);
  }
  ExperimentConfig cfg = experiment_config_from_json(json::parse(in));
  if (a.jobs > 0) cfg.jobs = a.jobs;
  if (a.seed_set) cfg.seed = a.seed;
  if (a.budget > 0.0) cfg.budget.value = a.budget;
  ExperimentBundle bundle = run_experiment(cfg);
  write_experiment_outputs(bundle, a.out_dir);
  if (log_level() >= 1) {
    std::printf("wrote %s/results.json and %s/metrics.csv (%zu runs)\n",
                a.out_dir.c_str(), a.out_dir.c_str(), bundle.runs.size());
  }
  return 0;
}

struct ValidateArgs {
  int samples = 1000;
  std::uint64_t seed = 7;
  int dim = 6;
  std::string out;
};

int cmd_validate(const ValidateArgs& a) {
  using namespace italex;
  Mat q = Mat::Zero(a.dim, a.dim);
  for (int i = 0; i < a.dim; ++i) {
    q(i, i) = 1.0 + 3.0 * (a.dim > 1 ? static_cast<double>(i) / (a.dim - 1)
                                     : 0.0);
  }
  std::vector<OuterFunction> outers;
  outers.push_back(make_outer_l1(a.dim));
  outers.push_back(make_outer_ellipsoid(q, Vec::Zero(a.dim)));
  outers.push_back(make_outer_elastic_net(a.dim, 0.5, 1));
  outers.push_back(make_outer_elastic_net(a.dim, 0.5, 2));
  outers.push_back(make_outer_qnorm(q));
  json reports = json::array();
  bool ok = true;
  for (const auto& w : outers) {
    const ErrorBoundReport rep = validate_error_bound(w, a.samples, a.seed);
    ok = ok && rep.passed();
    reports.push_back({{"kind", rep.kind},
                       {"kappa", rep.kappa},
                       {"gamma", rep.gamma},
                       {"samples", rep.samples},
                       {"max_violation", rep.max_violation}});
    if (log_level() >= 1) {
      std::printf("kind=%s kappa=%g gamma=%g samples=%d max_violation=%.3e %s\n",
                  rep.kind.c_str(), rep.kappa, rep.gamma, rep.samples,
                  rep.max_violation, rep.passed() ? "pass" : "FAIL");
    }
  }
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw std::invalid_argument("cannot write report to " + a.out);
    out << reports.dump(1) << "\n";
  }
  if (!ok) throw std::runtime_error("error-bound validation failed");
  return 0;
}

struct PathArgs {
  std::string instance_path;
  int lambdas = 15;
  double tol = 1e-6;
  std::string out = "path.csv";
};

int cmd_path(const PathArgs& a) {
  using namespace italex;
  const InstanceSpec spec = load_instance_spec(a.instance_path);
  const BilevelInstance inst = build_instance(spec);
  const auto points = regularization_path(
      inst, default_lambda_ladder(inst, a.lambdas), a.tol);
  std::ofstream out(a.out);
  if (!out) throw std::invalid_argument("cannot write path to " + a.out);
  out << "lambda,phi_gap,omega\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.lambda,
                  p.phi_gap, p.omega);
    out << buf;
  }
  if (log_level() >= 1) {
    std::printf("wrote %s (%zu path points)\n", a.out.c_str(), points.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"level-set expansion solver for simple bilevel problems"};
  app.require_subcommand(1);

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "solve one instance");
  solve->add_option("instance", sa.instance_path, "instance JSON file")
      ->required();
  solve->add_option("--method", sa.method,
                    "italex-pg|italex-gcg|italex-smooth|bigsam|irpg");
  solve->add_option("--eps", sa.eps, "target tolerance");
  solve->add_option("--eps1", sa.eps1, "initial tolerance");
  solve->add_option("--seed", sa.seed, "seed (echoed in report)");
  solve->add_option("--out", sa.out, "report output path");
  solve->add_option("--alpha0", sa.alpha0, "initial level override");
  solve->add_option("--budget", sa.budget, "baseline iteration budget");
  solve->add_option("--snapshot-period", sa.snapshot_period,
                    "iterations between snapshots");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "run an experiment config");
  bench->add_option("config", ba.config_path, "experiment config JSON")
      ->required();
  bench->add_option("--out-dir", ba.out_dir, "output directory");
  bench->add_option("--jobs", ba.jobs, "parallel instance workers");
  bench->add_option("--seed", ba.seed, "seed override")
      ->each([&](const std::string&) { ba.seed_set = true; });
  bench->add_option("--budget", ba.budget, "budget value override");

  ValidateArgs va;
  CLI::App* validate =
      app.add_subcommand("validate", "validate error bounds of geometries");
  validate->add_option("--samples", va.samples, "samples per geometry");
  validate->add_option("--seed", va.seed, "rng seed");
  validate->add_option("--dim", va.dim, "ambient dimension");
  validate->add_option("--out", va.out, "JSON report path");

  PathArgs pa;
  CLI::App* path = app.add_subcommand("path", "emit a regularization path");
  path->add_option("instance", pa.instance_path, "instance JSON file")
      ->required();
  path->add_option("--lambdas", pa.lambdas, "ladder depth");
  path->add_option("--tol", pa.tol, "reference tolerance");
  path->add_option("--out", pa.out, "CSV output path");

  try {
    app.parse(argc, argv);
    if (solve->parsed()) return cmd_solve(sa);
    if (bench->parsed()) return cmd_bench(ba);
    if (validate->parsed()) return cmd_validate(va);
    if (path->parsed()) return cmd_path(pa);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const italex::UnsupportedConfiguration& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const italex::OracleBudgetExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const italex::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
