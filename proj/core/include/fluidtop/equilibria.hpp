#pragma once

#include "fluidtop/body.hpp"
#include "fluidtop/dynamics.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fluidtop {

/// Steady-state families: permanent rotations about the vertical (PR) and
/// tilted steady spins (SP when lambda1 == lambda2, SP1, SP2).
enum class Family { PR, SP, SP1, SP2 };

[[nodiscard]] std::string_view family_name(Family f);
[[nodiscard]] std::optional<Family> parse_family(std::string_view name);

/// (c, omega, gamma) = (0, alpha q, q).
struct SteadyState {
  Family family = Family::PR;
  double alpha = 0.0;
  Vec3 q = kE3;
  SystemState state;
  double residual = 0.0;  ///< |rhs| at state
};

/// Families making up the equilibrium set for the multiplicity pattern of lambda.
[[nodiscard]] std::vector<Family> enumerate_families(const BodyParams& params);

struct SteadyOptions {
  bool unit_q = true;
  int branch_sign = 1;           ///< selects the sign of the completed coordinate
  double free_coordinate = 1.0;  ///< used when unit_q is false (q3 for PR, q1 for SP1, q2 for SP2)
  double azimuth = 0.0;          ///< direction of (q1, q2) for SP
  bool allow_sp = false;         ///< SP needs lambda1 == lambda2, which validation rejects
};

/// Builds the family member with spin rate alpha. Throws std::domain_error when
/// the unit-sphere completion is infeasible (|q3| > 1) and std::invalid_argument
/// when the family is unavailable for these moments or alpha == 0 for SP families.
[[nodiscard]] SteadyState make_steady(Family family, double alpha, const RigidFluidModel& model,
                                      const SteadyOptions& options = {});
/// Rigid-only embedding (N = 0).
[[nodiscard]] SteadyState make_steady(Family family, double alpha, const BodyParams& params,
                                      const SteadyOptions& options = {});

/// The fixed value of q3 for an SP-type family, -beta^2 / (alpha^2 (lambda3 - lambda_i)).
[[nodiscard]] double sp_axis_height(Family family, double alpha, const BodyParams& params);

/// |alpha^2 q x I q - beta^2 e3 x q|
[[nodiscard]] double steady_identity_residual(const SteadyState& s, const BodyParams& params);
[[nodiscard]] double steady_identity_residual(double alpha, const Vec3& q, const BodyParams& params);

inline constexpr double kGenericityMargin = 1e-6;

struct Condition {
  std::string name;
  double value = 0.0;
  double target = 1.0;
  bool passed = false;  ///< value differs from target by more than the margin
};

struct GenericityFlags {
  std::vector<Condition> conditions;
  double margin = kGenericityMargin;
  /// All conditions pass, so the classification theorem applies.
  [[nodiscard]] bool passed() const;
  /// Some condition sits inside the margin band.
  [[nodiscard]] bool degenerate() const { return !passed(); }
};

[[nodiscard]] GenericityFlags genericity_flags(const SteadyState& s, const BodyParams& params,
                                               double margin = kGenericityMargin);

struct NewtonOptions {
  int max_iter = 30;
  double tolerance = 1e-12;
  double max_displacement = 1.0;
  double rank_tol = 1e-9;  ///< relative to the largest singular value
};

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  bool rank_deficient = false;
  std::string message;
  SteadyState steady;
};

/// Newton iteration on rhs = 0 bordered by the two weakest directions of the
/// Jacobian at the guess, which pins the position along the equilibrium manifold.
[[nodiscard]] NewtonResult newton_refine(const SystemState& guess, const RigidFluidModel& model,
                                         const NewtonOptions& options = {});

/// Reads (alpha, q) off an equilibrium and tags the nearest family.
[[nodiscard]] SteadyState identify_steady(const Eigen::VectorXd& u, const RigidFluidModel& model,
                                          double tol = 1e-8);

struct DataConditionFlags {
  double k = 0.0;  ///< gamma0 . I (omega0 - a0)
  std::vector<Condition> conditions;
  bool zero_spin = false;
  bool unit_gamma = true;
  [[nodiscard]] bool passed() const;
};

[[nodiscard]] DataConditionFlags data_condition_flags(const SystemState& s0, const RigidFluidModel& model,
                                                      double margin = kGenericityMargin);
/// Same conditions for a given K.
[[nodiscard]] DataConditionFlags data_condition_flags(double k, const BodyParams& params,
                                                      double margin = kGenericityMargin);

}  // namespace fluidtop
