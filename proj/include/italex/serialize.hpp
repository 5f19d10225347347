#pragma once

#include <fstream>
#include <json.hpp>
#include <string>

#include "italex/outer_functions.hpp"
#include "italex/solver.hpp"

namespace italex {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Instance description. JSON schema:
//
// {
//   "A": {"rows": m, "cols": n, "data": [... row-major ...]},
//   "b": [...],
//   "g": {"kind": "none" | "nonneg" | "box", "lower": [...], "upper": [...]},
//   "omega": {"kind": "l1" | "ellipsoid" | "elastic_net" | "qnorm",
//             "rho": 0.05, "row": 1,          // elastic_net
//             "Q": {...}, "x0": [...]},        // ellipsoid / qnorm
//   "lipschitz": <optional L_f override>,
//   "radius_bound": <optional inner-solver radius>,
//   "reference": {"phi_star":, "omega_star":, "x_star": [...]}   // optional
// }

struct GSpec {
  std::string kind = "none";
  Vec lower, upper;
};

struct OmegaSpec {
  std::string kind = "l1";
  double rho = 0.05;  // elastic net
  int row = 1;        // elastic net error-bound row
  Mat Q;              // ellipsoid / qnorm
  Vec x0;             // ellipsoid center
};

struct InstanceSpec {
  Mat A;
  Vec b;
  GSpec g;
  OmegaSpec omega;
  std::optional<double> lipschitz;
  std::optional<double> radius_bound;
  std::optional<double> phi_star, omega_star;
  std::optional<Vec> x_star;
};

inline json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

inline json mat_to_json(const Mat& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  out["data"] = std::move(data);
  return out;
}

inline Mat mat_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix data length mismatch");
  }
  Mat m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = data[k++];
  }
  return m;
}

inline json instance_to_json(const InstanceSpec& s) {
  json j;
  j["A"] = mat_to_json(s.A);
  j["b"] = vec_to_json(s.b);
  json g;
  g["kind"] = s.g.kind;
  if (s.g.kind == "box") {
    g["lower"] = vec_to_json(s.g.lower);
    g["upper"] = vec_to_json(s.g.upper);
  }
  j["g"] = std::move(g);
  json w;
  w["kind"] = s.omega.kind;
  if (s.omega.kind == "elastic_net") {
    w["rho"] = s.omega.rho;
    w["row"] = s.omega.row;
  }
  if (s.omega.kind == "ellipsoid" || s.omega.kind == "qnorm") {
    w["Q"] = mat_to_json(s.omega.Q);
  }
  if (s.omega.kind == "ellipsoid" && s.omega.x0.size() > 0) {
    w["x0"] = vec_to_json(s.omega.x0);
  }
  j["omega"] = std::move(w);
  if (s.lipschitz) j["lipschitz"] = *s.lipschitz;
  if (s.radius_bound) j["radius_bound"] = *s.radius_bound;
  if (s.phi_star || s.omega_star || s.x_star) {
    json r;
    if (s.phi_star) r["phi_star"] = *s.phi_star;
    if (s.omega_star) r["omega_star"] = *s.omega_star;
    if (s.x_star) r["x_star"] = vec_to_json(*s.x_star);
    j["reference"] = std::move(r);
  }
  return j;
}

inline InstanceSpec instance_from_json(const json& j) {
  InstanceSpec s;
  s.A = mat_from_json(j.at("A"));
  s.b = vec_from_json(j.at("b"));
  if (s.b.size() != s.A.rows()) {
    throw std::invalid_argument("instance: b length != rows(A)");
  }
  if (j.contains("g")) {
    const auto& g = j.at("g");
    s.g.kind = g.at("kind").get<std::string>();
    if (s.g.kind == "box") {
      s.g.lower = vec_from_json(g.at("lower"));
      s.g.upper = vec_from_json(g.at("upper"));
    } else if (s.g.kind != "none" && s.g.kind != "nonneg") {
      throw std::invalid_argument("instance: unknown g kind " + s.g.kind);
    }
  }
  if (j.contains("omega")) {
    const auto& w = j.at("omega");
    s.omega.kind = w.at("kind").get<std::string>();
    if (s.omega.kind == "elastic_net") {
      s.omega.rho = w.value("rho", 0.05);
      s.omega.row = w.value("row", 1);
    } else if (s.omega.kind == "ellipsoid" || s.omega.kind == "qnorm") {
      s.omega.Q = mat_from_json(w.at("Q"));
      if (w.contains("x0")) s.omega.x0 = vec_from_json(w.at("x0"));
    } else if (s.omega.kind != "l1") {
      throw std::invalid_argument("instance: unknown omega kind " +
                                  s.omega.kind);
    }
  }
  if (j.contains("lipschitz")) s.lipschitz = j.at("lipschitz").get<double>();
  if (j.contains("radius_bound")) {
    s.radius_bound = j.at("radius_bound").get<double>();
  }
  if (j.contains("reference")) {
    const auto& r = j.at("reference");
    if (r.contains("phi_star")) s.phi_star = r.at("phi_star").get<double>();
    if (r.contains("omega_star")) {
      s.omega_star = r.at("omega_star").get<double>();
    }
    if (r.contains("x_star")) s.x_star = vec_from_json(r.at("x_star"));
  }
  return s;
}

inline BilevelInstance build_instance(const InstanceSpec& s) {
  BilevelInstance inst;
  const int n = static_cast<int>(s.A.cols());
  const double lf =
      s.lipschitz ? *s.lipschitz
                  : 2.0 * power_iteration_lmax_ata(s.A) * (1.0 + 1e-8);
  inst.smooth = make_f_least_squares(s.A, s.b, lf);
  inst.lsq_A = std::make_shared<const Mat>(s.A);
  inst.lsq_b = std::make_shared<const Vec>(s.b);
  if (s.g.kind == "none") {
    inst.nonsmooth = make_g_none();
  } else if (s.g.kind == "nonneg") {
    inst.nonsmooth = make_g_nonneg();
  } else if (s.g.kind == "box") {
    inst.nonsmooth = make_g_box(s.g.lower, s.g.upper);
  } else {
    throw std::invalid_argument("build_instance: unknown g kind " + s.g.kind);
  }
  if (s.omega.kind == "l1") {
    inst.outer = make_outer_l1(n);
  } else if (s.omega.kind == "ellipsoid") {
    const Vec x0 = s.omega.x0.size() == n ? s.omega.x0 : Vec(Vec::Zero(n));
    inst.outer = make_outer_ellipsoid(s.omega.Q, x0);
  } else if (s.omega.kind == "elastic_net") {
    inst.outer = make_outer_elastic_net(n, s.omega.rho, s.omega.row);
  } else if (s.omega.kind == "qnorm") {
    inst.outer = make_outer_qnorm(s.omega.Q);
  } else {
    throw std::invalid_argument("build_instance: unknown omega kind " +
                                s.omega.kind);
  }
  inst.ref_phi_star = s.phi_star;
  inst.ref_omega_star = s.omega_star;
  inst.ref_x_star = s.x_star;
  if (s.radius_bound) inst.inner_radius_bound = *s.radius_bound;
  return inst;
}

inline InstanceSpec load_instance_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open instance file: " + path);
  json j = json::parse(in);
  return instance_from_json(j);
}

// ---------------------------------------------------------------------------
// Solve report, schema:
// {config, rounds: [{eps, phi_bar, oracle_calls, step_iters}], alpha_trace,
//  snapshots: [{t_ms, iter, phi, omega}], final: {...}}

inline json report_to_json(const SolveReport& r) {
  json j;
  j["config"] = {{"method", r.method},
                 {"eps", r.eps_target},
                 {"eps1", r.eps1},
                 {"instance_id", r.instance_id}};
  json rounds = json::array();
  for (const auto& rr : r.round_records) {
    rounds.push_back({{"eps", rr.eps},
                      {"phi_bar", rr.phi_bar},
                      {"oracle_calls", rr.oracle_calls},
                      {"step_iters", rr.step_iters}});
  }
  j["rounds"] = std::move(rounds);
  json trace = json::array();
  for (double a : r.alpha_trace) trace.push_back(a);
  j["alpha_trace"] = std::move(trace);
  json snaps = json::array();
  for (const auto& s : r.snapshots) {
    snaps.push_back({{"t_ms", s.t_ms},
                     {"iter", s.iter},
                     {"phi", s.phi},
                     {"omega", s.omega}});
  }
  j["snapshots"] = std::move(snaps);
  json fin;
  fin["phi"] = r.final_phi;
  fin["omega"] = r.final_omega;
  if (r.feas_dist) fin["feas_dist"] = *r.feas_dist;
  fin["alpha"] = r.alpha_final;
  fin["rounds"] = r.rounds;
  fin["oracle_calls"] = r.oracle_calls;
  fin["step_iterations"] = r.step_iterations;
  fin["truncated"] = r.truncated;
  j["final"] = std::move(fin);
  return j;
}

}  // namespace italex
