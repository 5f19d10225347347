#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace italex {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative tolerance for level-set membership tests: iterative projections
// return boundary points with round-off, so omega(z) <= alpha must be read
// as omega(z) <= alpha + level_tol(alpha).
inline double level_tol(double alpha) {
  return 1e-9 * std::max(1.0, std::abs(alpha));
}

// Requested method/geometry combination cannot be run (e.g. GCG without a
// linear oracle, smooth-inner solver on an instance with g != 0).
class UnsupportedConfiguration : public std::runtime_error {
 public:
  explicit UnsupportedConfiguration(const std::string& what)
      : std::runtime_error(what) {}
};

// A quantity that is nonnegative in exact arithmetic came out negative far
// beyond round-off. Signals a broken oracle or a wrong Lipschitz constant.
class NumericalInconsistency : public std::runtime_error {
 public:
  explicit NumericalInconsistency(const std::string& what)
      : std::runtime_error(what) {}
};

// Negative values within `floor` of zero are round-off and clamped; anything
// below that is a real bug and raises.
inline double clamp_roundoff(double v, double floor, const char* label) {
  if (v < -floor) {
    throw NumericalInconsistency(std::string(label) + " = " +
                                 std::to_string(v) + " below -" +
                                 std::to_string(floor));
  }
  return v < 0.0 ? 0.0 : v;
}

}  // namespace italex
