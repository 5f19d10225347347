#pragma once

#include <memory>
#include <string>

#include "italex/problem.hpp"
#include "italex/rng.hpp"

namespace italex {

// omega(x) = ||x||_1. Error bound constants kappa = 1, gamma = 1.
inline OuterFunction make_outer_l1(int dim) {
  OuterFunction w;
  w.kind = OuterKind::l1;
  w.dim = dim;
  w.kappa = 1.0;
  w.gamma = 1.0;
  w.lower_bound = 0.0;
  w.evaluate = [](const Vec& x) { return x.cwiseAbs().sum(); };
  w.geometry.project = [](const Vec& x, double a) {
    return project_l1_ball(x, std::max(a, 0.0));
  };
  w.geometry.lmo = [](const Vec& c, double a) {
    return lmo_l1_ball(c, std::max(a, 0.0));
  };
  w.geometry.diameter = [](double a) { return 2.0 * std::max(a, 0.0); };
  w.geometry.contains = [](const Vec& x, double a) {
    return x.cwiseAbs().sum() <= a + level_tol(a);
  };
  return w;
}

// omega(x) = ||x - x0||_Q with Q symmetric positive definite.
// kappa = 1, gamma = 1 / sqrt(lambda_min(Q)).
inline OuterFunction make_outer_ellipsoid(const Mat& Q, const Vec& x0) {
  auto proj = std::make_shared<const EllipsoidProjector>(Q);
  OuterFunction w;
  w.kind = OuterKind::ellipsoid;
  w.dim = static_cast<int>(Q.rows());
  w.kappa = 1.0;
  w.gamma = 1.0 / std::sqrt(proj->lambda_min());
  w.lower_bound = 0.0;
  w.center = x0;
  w.projector = proj;
  w.evaluate = [proj, x0](const Vec& x) { return proj->q_norm(x - x0); };
  w.geometry.project = [proj, x0](const Vec& x, double a) {
    return Vec(x0 + proj->project(x - x0, std::max(a, 0.0)));
  };
  w.geometry.lmo = [proj, x0](const Vec& c, double a) {
    return Vec(x0 + proj->lmo(c, std::max(a, 0.0)));
  };
  const double lmin = proj->lambda_min();
  w.geometry.diameter = [lmin](double a) {
    return 2.0 * std::max(a, 0.0) / std::sqrt(lmin);
  };
  w.geometry.contains = [proj, x0](const Vec& x, double a) {
    return proj->q_norm(x - x0) <= a + level_tol(a);
  };
  return w;
}

// omega(x) = ||x||_1 + rho ||x||^2. Table row 1 has kappa = 1, gamma = 1;
// row 2 (strong convexity) has kappa = 2, gamma = 1 / rho. Which row drives
// the expansion is the caller's choice; row 1 expands faster at small gaps
// and is the default.
inline OuterFunction make_outer_elastic_net(int dim, double rho,
                                            int table_row = 1) {
  if (rho <= 0.0) {
    throw std::invalid_argument("make_outer_elastic_net: rho must be > 0");
  }
  if (table_row != 1 && table_row != 2) {
    throw std::invalid_argument("make_outer_elastic_net: row must be 1 or 2");
  }
  OuterFunction w;
  w.kind = OuterKind::elastic_net;
  w.dim = dim;
  w.en_rho = rho;
  if (table_row == 1) {
    w.kappa = 1.0;
    w.gamma = 1.0;
  } else {
    w.kappa = 2.0;
    w.gamma = 1.0 / rho;
  }
  w.lower_bound = 0.0;
  w.evaluate = [rho](const Vec& x) { return elastic_net_value(x, rho); };
  w.geometry.project = [rho](const Vec& x, double a) {
    return project_elastic_net_ball(x, rho, std::max(a, 0.0));
  };
  w.geometry.lmo = [rho](const Vec& c, double a) {
    return lmo_elastic_net_ball(c, rho, std::max(a, 0.0));
  };
  // Upper bound: the set lies in the l1 ball of radius a and in the
  // euclidean ball of radius sqrt(a / rho).
  w.geometry.diameter = [rho](double a) {
    const double aa = std::max(a, 0.0);
    return 2.0 * std::min(aa, std::sqrt(aa / rho));
  };
  w.geometry.contains = [rho](const Vec& x, double a) {
    return elastic_net_value(x, rho) <= a + level_tol(a);
  };
  return w;
}

// omega(x) = x^T Q x: smooth and 2 lambda_min(Q)-strongly convex, so
// kappa = 2, gamma = 1 / lambda_min(Q). Level sets are ellipsoids of
// Q-radius sqrt(alpha).
inline OuterFunction make_outer_qnorm(const Mat& Q) {
  auto proj = std::make_shared<const EllipsoidProjector>(Q);
  OuterFunction w;
  w.kind = OuterKind::qnorm;
  w.dim = static_cast<int>(Q.rows());
  w.kappa = 2.0;
  w.gamma = 1.0 / proj->lambda_min();
  w.lower_bound = 0.0;
  w.projector = proj;
  w.evaluate = [proj](const Vec& x) {
    const double q = proj->q_norm(x);
    return q * q;
  };
  w.geometry.project = [proj](const Vec& x, double a) {
    return proj->project(x, std::sqrt(std::max(a, 0.0)));
  };
  w.geometry.lmo = [proj](const Vec& c, double a) {
    return proj->lmo(c, std::sqrt(std::max(a, 0.0)));
  };
  const double lmin = proj->lambda_min();
  w.geometry.diameter = [lmin](double a) {
    return 2.0 * std::sqrt(std::max(a, 0.0) / lmin);
  };
  w.geometry.contains = [proj](const Vec& x, double a) {
    const double q = proj->q_norm(x);
    return q * q <= a + level_tol(a);
  };
  w.gradient = [Q](const Vec& x) { return Vec(2.0 * (Q * x)); };
  w.grad_lipschitz = 2.0 * proj->lambda_max();
  w.strong_convexity = 2.0 * lmin;
  return w;
}

// ---------------------------------------------------------------------------
// Empirical check of dist(x, Lev(alpha))^kappa <= gamma [omega(x) - alpha]_+
// on seeded random (x, alpha) pairs; x is drawn from a box of half-width
// 10 * diameter(alpha) around the level set's center.
struct ErrorBoundReport {
  std::string kind;
  double kappa = 0.0;
  double gamma = 0.0;
  int samples = 0;
  double max_violation = -kInf;

  bool passed() const { return max_violation <= 1e-8; }
};

inline ErrorBoundReport validate_error_bound(const OuterFunction& outer,
                                             int samples,
                                             std::uint64_t seed) {
  if (samples < 1) {
    throw std::invalid_argument("validate_error_bound: samples must be >= 1");
  }
  CounterRng rng(seed);
  const Vec center = outer.center.size() == outer.dim
                         ? outer.center
                         : Vec(Vec::Zero(outer.dim));
  ErrorBoundReport rep;
  rep.kind = outer_kind_name(outer.kind);
  rep.kappa = outer.kappa;
  rep.gamma = outer.gamma;
  rep.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const double alpha = outer.lower_bound + rng.uniform(0.05, 4.05);
    const double half_width = 10.0 * outer.geometry.diameter(alpha);
    const Vec x = center + rng.uniform_vec(outer.dim, -half_width, half_width);
    const double dist = (x - outer.geometry.project(x, alpha)).norm();
    const double excess = std::max(outer.evaluate(x) - alpha, 0.0);
    const double violation =
        std::pow(dist, outer.kappa) - outer.gamma * excess;
    rep.max_violation = std::max(rep.max_violation, violation);
  }
  return rep;
}

}  // namespace italex
