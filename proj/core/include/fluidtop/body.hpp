#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fluidtop {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Physical parameters of the heavy rigid body with a fluid-filled cavity.
///
/// Lengths are scaled so that the cavity is the unit ball. The inertia tensor
/// is diagonal in the principal frame and stored as its three moments.
struct BodyParams {
  Vec3 lambda{1.0, 2.0, 3.0};  ///< principal moments of the whole system about O
  double beta2 = 1.0;          ///< M g l
  double rho = 1.0;            ///< fluid density
  double nu = 0.1;             ///< kinematic viscosity

  [[nodiscard]] double mu() const { return rho * nu; }
};

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  /// Non-fatal checks are reported but do not affect ValidationReport::passed().
  bool fatal = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] const HypothesisCheck* find(const std::string& name) const;
};

/// Checks positivity, inertia realizability, and the excluded moment pattern
/// lambda1 == lambda2 != lambda3. Also reports (non-fatally) whether the
/// moments exceed the rotational inertia of the fluid in the unit-ball cavity.
[[nodiscard]] ValidationReport validate_hypotheses(const BodyParams& params);

/// Relative tolerance used when comparing principal moments for equality.
inline constexpr double kMomentEqualityTol = 1e-12;

[[nodiscard]] bool moments_equal(double a, double b);

/// Rotational inertia of a fluid of density rho filling the unit ball, about its center.
[[nodiscard]] double cavity_fluid_inertia(double rho);

[[nodiscard]] inline Vec3 inertia_apply(const BodyParams& params, const Vec3& w) {
  return params.lambda.cwiseProduct(w);
}

[[nodiscard]] inline Vec3 inertia_solve(const BodyParams& params, const Vec3& w) {
  return w.cwiseQuotient(params.lambda);
}

[[nodiscard]] inline Mat3 inertia_matrix(const BodyParams& params) {
  return params.lambda.asDiagonal();
}

/// Matrix form of the cross product: skew(a) * b == a.cross(b).
[[nodiscard]] inline Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

inline const Vec3 kE3{0.0, 0.0, 1.0};

}  // namespace fluidtop
