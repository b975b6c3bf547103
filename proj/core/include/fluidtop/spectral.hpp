#pragma once

#include "fluidtop/dynamics.hpp"
#include "fluidtop/equilibria.hpp"

#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace fluidtop {

/// Kernel: |Re| <= eps and |Im| <= eps. Axis: |Re| <= eps, |Im| > eps (purely
/// imaginary spectrum, which must be absent at a classifiable equilibrium).
/// Stable: Re > eps. Unstable: Re < -eps.
enum class Cluster { Kernel, Axis, Stable, Unstable };

struct SpectralSplit {
  double eps_c = 0.0;
  Eigen::VectorXcd eigenvalues;  ///< ascending real part
  std::vector<Cluster> clusters;
  Eigen::MatrixXd p_center;      ///< onto Kernel and Axis eigenvalues
  Eigen::MatrixXd p_stable;
  Eigen::MatrixXd p_unstable;
  int center_dim = 0;            ///< Kernel count
  int axis_dim = 0;
  int stable_dim = 0;
  int unstable_dim = 0;
  double gamma_s = std::numeric_limits<double>::infinity();  ///< min Re over stable
  double omega_u = std::numeric_limits<double>::infinity();  ///< min |Re| over unstable
  bool straddle = false;          ///< some eigenvalue within a factor 2 of a cluster boundary
  double eigenvector_mismatch = 0.0;  ///< projector difference against the eigenvector route
  std::vector<std::string> warnings;
};

/// L_h = -blockdiag(Eh, I)^{-1} J at a steady state, so u' = -L_h u is the linearized flow.
/// Throws std::invalid_argument if s is not an equilibrium to 1e-10.
[[nodiscard]] Eigen::MatrixXd assemble_linearization(const SteadyState& s, const RigidFluidModel& model);

/// 1e-7 times the spectral norm of L.
[[nodiscard]] double default_center_tolerance(const Eigen::MatrixXd& l);

/// Spectral projections from reordered complex Schur forms of L and L^T.
/// eps_c <= 0 selects default_center_tolerance.
[[nodiscard]] SpectralSplit spectral_split(const Eigen::MatrixXd& l, double eps_c = 0.0);

struct ProjectorAlgebra {
  double completeness = 0.0;   ///< |Pc + Ps + Pu - I|
  double idempotence = 0.0;    ///< max |P^2 - P|
  double annihilation = 0.0;   ///< max |P_a P_b|, a != b
  double commutation = 0.0;    ///< max |P L - L P|
  [[nodiscard]] double worst() const;
};

[[nodiscard]] ProjectorAlgebra projector_algebra(const SpectralSplit& split, const Eigen::MatrixXd& l);

/// max over eigenvalues of the distance from its conjugate to the spectrum.
[[nodiscard]] double conjugate_pair_residual(const Eigen::VectorXcd& ev);

/// min |Re| over eigenvalues outside the kernel cluster (infinity if none).
[[nodiscard]] double imaginary_axis_margin(const SpectralSplit& split);

struct SemisimpleResult {
  int algebraic = 0;      ///< kernel-cluster size
  int geometric = 0;      ///< kernel dimension of L restricted to that cluster
  double transversality = 0.0;  ///< smallest singular value of [kernel basis | range basis]
  bool ill_conditioned = false;
  bool passed = false;
};

[[nodiscard]] SemisimpleResult semisimple_check(const Eigen::MatrixXd& l, double eps_c = 0.0);

/// Analytic tangent vectors of the unconstrained family through s:
/// d/d alpha and d/d(free axis coordinates). Two columns (three for SP).
[[nodiscard]] Eigen::MatrixXd tangent_basis(const SteadyState& s, const RigidFluidModel& model);

struct KernelResidual {
  Eigen::VectorXd w1;
  Eigen::VectorXd w2;
  double residual1 = 0.0;  ///< |L w1| / |w1|
  double residual2 = 0.0;
};

/// For SP1: w1 = (0; q1 e1 - q3 e3; -(2/alpha) q3 e3), w2 = (0; alpha e1; e1).
[[nodiscard]] KernelResidual kernel_residual_check(const SteadyState& s, const RigidFluidModel& model);

enum class Verdict { NormallyStable, NormallyHyperbolic, Degenerate };
[[nodiscard]] std::string_view verdict_name(Verdict v);

struct Classification {
  Verdict verdict = Verdict::Degenerate;
  int kernel_dim = 0;
  int tangent_dim = 0;
  double tangent_residual = 0.0;  ///< max |L t| / |t| over tangent columns
  SemisimpleResult semisimple;
  double axis_margin = 0.0;
  int unstable_count = 0;
  bool genericity_passed = true;
  std::vector<std::string> reasons;  ///< why Degenerate
  SpectralSplit split;
};

/// Generic test: L is the (sign-flipped) linearization, tangent spans the
/// equilibrium manifold's tangent space.
[[nodiscard]] Classification classify_operator(const Eigen::MatrixXd& l, const Eigen::MatrixXd& tangent,
                                               double eps_c = 0.0);

[[nodiscard]] Classification classify(const SteadyState& s, const RigidFluidModel& model,
                                      double eps_c = 0.0, double gen_margin = kGenericityMargin);

}  // namespace fluidtop
