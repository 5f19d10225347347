#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "italex/types.hpp"

namespace italex {

// Level-set oracle bundle for an outer function omega: everything the solver
// needs to work with Lev_omega(alpha) = { x : omega(x) <= alpha }.
struct LevelSetGeometry {
  std::function<Vec(const Vec&, double)> project;   // (x, alpha)
  std::function<Vec(const Vec&, double)> lmo;       // (cost, alpha)
  std::function<double(double)> diameter;           // alpha -> upper bound
  std::function<bool(const Vec&, double)> contains; // membership with tol
};

// ---------------------------------------------------------------------------
// Proximal maps of the shipped nonsmooth inner parts.

inline Vec prox_l1(const Vec& x, double t) {
  Vec u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]) - t;
    u[i] = a > 0.0 ? (x[i] >= 0.0 ? a : -a) : 0.0;
  }
  return u;
}

struct IndicatorSpec {
  enum class Kind { nonneg, box } kind = Kind::nonneg;
  Vec lower, upper;  // box only
};

inline Vec prox_indicator(const Vec& x, const IndicatorSpec& set) {
  if (set.kind == IndicatorSpec::Kind::nonneg) return x.cwiseMax(0.0);
  if (set.lower.size() != x.size() || set.upper.size() != x.size() ||
      (set.lower.array() > set.upper.array()).any()) {
    throw std::invalid_argument("prox_indicator: malformed box");
  }
  return x.cwiseMax(set.lower).cwiseMin(set.upper);
}

// ---------------------------------------------------------------------------
// l1 ball.

// Exact Euclidean projection onto { u : ||u||_1 <= r } via the sorted
// threshold rule; O(n log n) and deterministic.
inline Vec project_l1_ball(const Vec& x, double r) {
  if (r < 0.0) throw std::invalid_argument("project_l1_ball: negative radius");
  if (x.cwiseAbs().sum() <= r) return x;
  if (r == 0.0) return Vec::Zero(x.size());
  std::vector<double> a(x.data(), x.data() + x.size());
  for (double& v : a) v = std::abs(v);
  std::sort(a.begin(), a.end(), std::greater<double>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    cumsum += a[j];
    const double cand = (cumsum - r) / static_cast<double>(j + 1);
    if (a[j] - cand > 0.0) {
      theta = cand;
    } else {
      break;
    }
  }
  Vec u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double m = std::abs(x[i]) - theta;
    u[i] = m > 0.0 ? (x[i] >= 0.0 ? m : -m) : 0.0;
  }
  return u;
}

// Vertex oracle of the cross-polytope: -r * sign(c_{i*}) * e_{i*} with i* the
// first coordinate of maximal |c_i|; sign(0) is +1.
inline Vec lmo_l1_ball(const Vec& c, double r) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < c.size(); ++i) {
    if (std::abs(c[i]) > std::abs(c[best])) best = i;
  }
  Vec p = Vec::Zero(c.size());
  p[best] = (c[best] >= 0.0 ? -r : r);
  return p;
}

// ---------------------------------------------------------------------------
// Ellipsoid { u : ||u - x0||_Q <= r } with Q symmetric positive definite.
// The eigendecomposition of Q is computed once and reused; the projection
// solves the dual scalar equation with safeguarded Newton.

class EllipsoidProjector {
 public:
  explicit EllipsoidProjector(const Mat& Q) {
    if (Q.rows() != Q.cols() || !Q.isApprox(Q.transpose(), 1e-10)) {
      throw std::invalid_argument("EllipsoidProjector: Q not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(Q);
    lambda_ = es.eigenvalues();
    basis_ = es.eigenvectors();
    if (lambda_.minCoeff() <= 0.0) {
      throw std::invalid_argument(
          "EllipsoidProjector: Q not positive definite");
    }
  }

  double lambda_min() const { return lambda_.minCoeff(); }
  double lambda_max() const { return lambda_.maxCoeff(); }

  double q_norm(const Vec& x) const {
    const Vec w = basis_.transpose() * x;
    return std::sqrt(std::max(0.0, (lambda_.array() * w.array().square()).sum()));
  }

  // argmin { ||u - x|| : ||u||_Q <= r }, centered form.
  Vec project(const Vec& x, double r) const {
    if (r < 0.0) throw std::invalid_argument("ellipsoid: negative radius");
    if (r == 0.0) return Vec::Zero(x.size());
    Vec w = basis_.transpose() * x;
    const double r2 = r * r;
    auto q2 = [&](double mu) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double d = 1.0 + mu * lambda_[i];
        s += lambda_[i] * w[i] * w[i] / (d * d);
      }
      return s;
    };
    if (q2(0.0) <= r2) return x;
    // psi(mu) = q2(mu) - r^2 is decreasing and convex: Newton from the left
    // stays left of the root; bisection backstop keeps the bracket valid.
    double lo = 0.0, hi = 1.0;
    while (q2(hi) > r2) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) break;
    }
    double mu = lo;
    const double rtol = 1e-12 * std::max(1.0, r);
    for (int it = 0; it < 200; ++it) {
      const double val = q2(mu);
      if (std::abs(std::sqrt(val) - r) <= rtol) break;
      if (val > r2) {
        lo = std::max(lo, mu);
      } else {
        hi = std::min(hi, mu);
      }
      double dpsi = 0.0;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double d = 1.0 + mu * lambda_[i];
        dpsi += -2.0 * lambda_[i] * lambda_[i] * w[i] * w[i] / (d * d * d);
      }
      double next = mu - (val - r2) / dpsi;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      mu = next;
    }
    Vec u(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      u[i] = w[i] / (1.0 + mu * lambda_[i]);
    }
    return basis_ * u;
  }

  // argmin { <c, u> : ||u||_Q <= r } = -r * Q^{-1} c / ||c||_{Q^{-1}}.
  Vec lmo(const Vec& c, double r) const {
    Vec w = basis_.transpose() * c;
    Vec s(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) s[i] = w[i] / lambda_[i];
    const double dual = std::sqrt(std::max(0.0, w.dot(s)));
    if (dual == 0.0) return Vec::Zero(c.size());
    return basis_ * (-(r / dual) * s);
  }

 private:
  Vec lambda_;
  Mat basis_;
};

inline Vec project_ellipsoid(const Vec& x, const Mat& Q, double r) {
  if (r <= 0.0) throw std::invalid_argument("project_ellipsoid: r must be > 0");
  return EllipsoidProjector(Q).project(x, r);
}

// ---------------------------------------------------------------------------
// Elastic-net "ball" { u : ||u||_1 + rho * ||u||^2 <= alpha }.

inline double elastic_net_value(const Vec& u, double rho) {
  return u.cwiseAbs().sum() + rho * u.squaredNorm();
}

// Projection by bisection on the dual multiplier lam >= 0 with
// u(lam) = soft(x, lam) / (1 + 2 lam rho).
inline Vec project_elastic_net_ball(const Vec& x, double rho, double alpha) {
  if (alpha < 0.0) {
    throw std::invalid_argument("project_elastic_net_ball: negative level");
  }
  if (rho <= 0.0) {
    throw std::invalid_argument("project_elastic_net_ball: rho must be > 0");
  }
  if (alpha == 0.0) return Vec::Zero(x.size());
  if (elastic_net_value(x, rho) <= alpha) return x;
  auto candidate = [&](double lam) {
    return Vec(prox_l1(x, lam) / (1.0 + 2.0 * lam * rho));
  };
  // Keep the returned point on the feasible side of the bracket so that
  // re-projecting it is a no-op.
  double lo = 0.0, hi = x.cwiseAbs().maxCoeff();
  Vec best = candidate(hi);
  double best_res = elastic_net_value(best, rho) - alpha;
  for (int it = 0; it < 200; ++it) {
    if (best_res >= -1e-12) break;
    const double mid = 0.5 * (lo + hi);
    Vec u = candidate(mid);
    const double res = elastic_net_value(u, rho) - alpha;
    if (res > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      best = std::move(u);
      best_res = res;
    }
  }
  return best;
}

// argmin { <c, p> : ||p||_1 + rho ||p||^2 <= alpha }. The dual candidate is
// p(nu) = -sign(c) soft(|c|, nu) / (2 nu rho); nu solves the active
// constraint by bisection on (0, max|c_i|).
inline Vec lmo_elastic_net_ball(const Vec& c, double rho, double alpha) {
  if (alpha < 0.0) {
    throw std::invalid_argument("lmo_elastic_net_ball: negative level");
  }
  const double cmax = c.cwiseAbs().maxCoeff();
  if (alpha == 0.0 || cmax == 0.0) return Vec::Zero(c.size());
  auto candidate = [&](double nu) {
    Vec p(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const double m = std::abs(c[i]) - nu;
      p[i] = m > 0.0 ? (c[i] >= 0.0 ? -m : m) / (2.0 * nu * rho) : 0.0;
    }
    return p;
  };
  double lo = cmax * 1e-18, hi = cmax;
  Vec p = candidate(hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    p = candidate(mid);
    const double res = elastic_net_value(p, rho) - alpha;
    if (std::abs(res) <= 1e-10) break;
    (res > 0.0 ? lo : hi) = mid;
  }
  return p;
}

}  // namespace italex
