#pragma once

#include "fluidtop/dynamics.hpp"
#include "fluidtop/equilibria.hpp"
#include "fluidtop/normal_form.hpp"
#include "fluidtop/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fluidtop {

/// K = gamma0 . (I omega0 + B^T c0) = gamma0 . I (omega0 - a0)
[[nodiscard]] double conserved_K(const SystemState& s0, const RigidFluidModel& model);

/// Real roots of sum_k coeffs[k] x^(deg - k) (highest degree first) from the
/// companion matrix, each polished by Newton steps.
[[nodiscard]] std::vector<double> real_polynomial_roots(const std::vector<double>& coeffs,
                                                        double imag_tol = 1e-8);
[[nodiscard]] double polynomial_value(const std::vector<double>& coeffs, double x);

/// (lambda3 - lambda_i) lambda_i a^4 - (lambda3 - lambda_i) K a^3 + beta^4, i = 1 (SP1) or 2 (SP2).
[[nodiscard]] std::vector<double> limit_quartic(Family family, const BodyParams& params, double k);

struct LimitCandidate {
  Family family = Family::PR;
  double alpha = 0.0;
  Vec3 q = kE3;
  bool feasible = true;          ///< |q3| <= 1, so the candidate lies on the unit sphere
  double polynomial_residual = 0.0;
  double identity_residual = 0.0;
  double momentum_residual = 0.0;  ///< |alpha q . I q - K|
  std::optional<Verdict> verdict;

  /// Signed spin about the vertical axis, omega3 = alpha q3.
  [[nodiscard]] double spin() const { return alpha * q[2]; }
};

struct LimitCandidateSet {
  double k = 0.0;
  int pattern_case = 0;  ///< 1..4 as listed for the moment multiplicities, 0 for the excluded pattern
  DataConditionFlags data;
  std::vector<LimitCandidate> candidates;

  [[nodiscard]] std::vector<const LimitCandidate*> of(Family f) const;
};

/// Candidates for the limit of any trajectory with conserved value K.
/// When model is given, every feasible candidate is classified.
[[nodiscard]] LimitCandidateSet predict_limit_candidates(const BodyParams& params, double k,
                                                         const RigidFluidModel* model = nullptr);

struct MatchReport {
  bool settled = false;
  bool refined = false;
  bool matched = false;
  double terminal_rhs = 0.0;
  double terminal_k = 0.0;
  SteadyState limit;
  int candidate = -1;
  double distance = 0.0;  ///< Euclidean distance in (alpha, q)
  double tolerance = 1e-4;
  DecayCertificate certificate;
  std::string message;
};

[[nodiscard]] MatchReport match_terminal(const Trajectory& traj, const LimitCandidateSet& candidates,
                                         const RigidFluidModel& model, double tol_match = 1e-4,
                                         const DecayWindow& window = {});

}  // namespace fluidtop
