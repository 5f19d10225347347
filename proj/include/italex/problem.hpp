#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "italex/geometry.hpp"
#include "italex/types.hpp"

namespace italex {

// Smooth inner part f: convex, differentiable, L_f-Lipschitz gradient.
struct SmoothObjective {
  // Returns f(x); fills *grad with the gradient when grad is non-null.
  std::function<double(const Vec&, Vec*)> value_and_gradient;
  double lipschitz_grad = 0.0;

  double value(const Vec& x) const { return value_and_gradient(x, nullptr); }
  Vec gradient(const Vec& x) const {
    Vec g;
    value_and_gradient(x, &g);
    return g;
  }
};

// Nonsmooth inner part g: proper closed convex, prox-friendly. The linear
// oracle and a finite domain diameter are only available when dom(g) is
// compact (the GCG route); the domain tag lets GCG fall back to the
// ball-restricted oracle when dom(g) is unbounded.
struct NonsmoothObjective {
  std::function<double(const Vec&)> evaluate;        // extended real-valued
  std::function<Vec(const Vec&, double)> prox;       // (x, t), t > 0
  std::function<Vec(const Vec&)> linear_oracle;      // empty when absent
  double domain_diameter = kInf;

  enum class Domain { all, nonneg, box } domain = Domain::all;
  bool is_zero = false;

  bool has_linear_oracle() const { return static_cast<bool>(linear_oracle); }
};

enum class OuterKind { l1, ellipsoid, elastic_net, qnorm };

inline const char* outer_kind_name(OuterKind k) {
  switch (k) {
    case OuterKind::l1: return "l1";
    case OuterKind::ellipsoid: return "ellipsoid";
    case OuterKind::elastic_net: return "elastic_net";
    case OuterKind::qnorm: return "qnorm";
  }
  return "?";
}

// Outer selection criterion omega: norm-like (compact level sets) with a
// kappa-power gamma-global error bound. Kind-specific extras feed the
// baselines (smoothing, gradients) and serialization.
struct OuterFunction {
  std::function<double(const Vec&)> evaluate;
  double kappa = 1.0;
  double gamma = 1.0;
  double lower_bound = 0.0;  // inf omega, finite for all shipped kinds
  LevelSetGeometry geometry;

  OuterKind kind = OuterKind::l1;
  int dim = 0;
  double en_rho = 0.0;                           // elastic net only
  Vec center;                                    // ellipsoid only
  std::shared_ptr<const EllipsoidProjector> projector;  // ellipsoid / qnorm

  // Populated only for smooth omega (qnorm); baselines require these.
  std::function<Vec(const Vec&)> gradient;
  double grad_lipschitz = kInf;
  double strong_convexity = 0.0;

  bool is_smooth() const { return static_cast<bool>(gradient); }
};

struct BilevelInstance {
  SmoothObjective smooth;
  NonsmoothObjective nonsmooth;
  OuterFunction outer;

  // Analytic/high-accuracy values, tests only.
  std::optional<double> ref_phi_star;
  std::optional<double> ref_omega_star;
  std::optional<Vec> ref_x_star;

  // Configured radius bound ||u0 - u*|| used to size the inner solver's
  // accelerated-rate iteration count.
  double inner_radius_bound = 10.0;

  // Raw least-squares data when f was built from (A, b); lets reference
  // oracles cross-check against a direct factorization.
  std::shared_ptr<const Mat> lsq_A;
  std::shared_ptr<const Vec> lsq_b;

  int dim() const { return outer.dim; }
};

// The pair y = (y1, y2) in dom(g) x Lev_omega(alpha) on which the lifted
// objective is evaluated; alpha_tag records the level at creation.
struct LiftedPoint {
  Vec y1;
  Vec y2;
  double alpha_tag = 0.0;
};

// phi(x) = f(x) + g(x), +inf outside dom(g).
inline double eval_phi(const BilevelInstance& inst, const Vec& x) {
  const double gval = inst.nonsmooth.evaluate(x);
  if (gval == kInf) return kInf;
  return inst.smooth.value(x) + gval;
}

// phi_hat^alpha(y) = phi(y1) + ||y1 - y2||^2 + indicator(omega(y2) <= alpha).
inline double eval_phi_hat(const BilevelInstance& inst, const LiftedPoint& y,
                           double alpha) {
  if (!inst.outer.geometry.contains(y.y2, alpha)) return kInf;
  const double p = eval_phi(inst, y.y1);
  if (p == kInf) return kInf;
  return p + (y.y1 - y.y2).squaredNorm();
}

struct LiftedGradient {
  Vec g1;  // grad f(y1) + 2 (y1 - y2)
  Vec g2;  // 2 (y2 - y1)
  double smooth_lipschitz;  // L_f + 2
};

inline LiftedGradient grad_f_hat(const BilevelInstance& inst,
                                 const LiftedPoint& y) {
  LiftedGradient out;
  Vec gf = inst.smooth.gradient(y.y1);
  out.g1 = gf + 2.0 * (y.y1 - y.y2);
  out.g2 = 2.0 * (y.y2 - y.y1);
  out.smooth_lipschitz = inst.smooth.lipschitz_grad + 2.0;
  return out;
}

// ---------------------------------------------------------------------------
// Inner nonsmooth-part factories.

inline NonsmoothObjective make_g_none() {
  NonsmoothObjective g;
  g.evaluate = [](const Vec&) { return 0.0; };
  g.prox = [](const Vec& x, double) { return x; };
  g.domain = NonsmoothObjective::Domain::all;
  g.is_zero = true;
  return g;
}

inline NonsmoothObjective make_g_nonneg() {
  NonsmoothObjective g;
  g.evaluate = [](const Vec& x) {
    const double atol = 1e-9 * (1.0 + x.cwiseAbs().maxCoeff());
    return x.minCoeff() >= -atol ? 0.0 : kInf;
  };
  g.prox = [](const Vec& x, double) { return Vec(x.cwiseMax(0.0)); };
  g.domain = NonsmoothObjective::Domain::nonneg;
  return g;
}

inline NonsmoothObjective make_g_box(const Vec& lower, const Vec& upper) {
  if (lower.size() != upper.size() ||
      (lower.array() > upper.array()).any()) {
    throw std::invalid_argument("make_g_box: malformed box");
  }
  NonsmoothObjective g;
  g.evaluate = [lower, upper](const Vec& x) {
    const double atol = 1e-9 * (1.0 + x.cwiseAbs().maxCoeff());
    const bool in = (x.array() >= lower.array() - atol).all() &&
                    (x.array() <= upper.array() + atol).all();
    return in ? 0.0 : kInf;
  };
  g.prox = [lower, upper](const Vec& x, double) {
    return Vec(x.cwiseMax(lower).cwiseMin(upper));
  };
  // Per-coordinate vertex rule; sign(0) treated as +1 for reproducibility.
  g.linear_oracle = [lower, upper](const Vec& c) {
    Vec p(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      p[i] = c[i] >= 0.0 ? lower[i] : upper[i];
    }
    return p;
  };
  g.domain_diameter = (upper - lower).norm();
  g.domain = NonsmoothObjective::Domain::box;
  return g;
}

// lambda_max(A^T A) by power iteration on the implicit normal matrix,
// deterministic start, relative accuracy well below the 1e-8 contract.
inline double power_iteration_lmax_ata(const Mat& A, int max_iters = 20000) {
  const Eigen::Index n = A.cols();
  if (n == 0 || A.rows() == 0) return 0.0;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = 1.0 / static_cast<double>(i + 1);
  }
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vec w = A.transpose() * (A * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / nw;
    if (it > 0 && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

// Least-squares smooth part f(x) = ||A x - b||^2 with L_f = 2 lambda_max(A^T A).
inline SmoothObjective make_f_least_squares(const Mat& A, const Vec& b,
                                            double lipschitz) {
  SmoothObjective f;
  f.value_and_gradient = [A, b](const Vec& x, Vec* grad) {
    Vec r = A * x - b;
    if (grad) *grad = 2.0 * (A.transpose() * r);
    return r.squaredNorm();
  };
  f.lipschitz_grad = lipschitz;
  return f;
}

}  // namespace italex
