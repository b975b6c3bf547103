#pragma once

#include "fluidtop/body.hpp"
#include "fluidtop/galerkin.hpp"
#include "fluidtop/ode.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fluidtop {

/// Galerkin coordinates of the relative fluid velocity, angular velocity and
/// gravity direction, all in the body frame.
struct SystemState {
  Eigen::VectorXd c;
  Vec3 omega = Vec3::Zero();
  Vec3 gamma = kE3;
};

/// Flat layout (c, omega, gamma) of length N + 6.
[[nodiscard]] Eigen::VectorXd pack(const SystemState& s);
[[nodiscard]] SystemState unpack(const Eigen::VectorXd& u, int n);

/// The semi-discrete equations of motion
///   Eh (c', omega') = R(u),  gamma' = -omega x gamma.
/// Eh is factorized once at construction.
class RigidFluidModel {
 public:
  RigidFluidModel(const BodyParams& params, BasisPtr basis);

  [[nodiscard]] const BodyParams& params() const { return params_; }
  [[nodiscard]] const GalerkinBasis& basis() const { return *basis_; }
  [[nodiscard]] const BasisPtr& basis_ptr() const { return basis_; }
  [[nodiscard]] int basis_size() const { return n_; }
  [[nodiscard]] int dim() const { return n_ + 6; }
  [[nodiscard]] const Eigen::MatrixXd& mass_block() const { return eh_; }
  /// blockdiag(Eh, I_3)
  [[nodiscard]] Eigen::MatrixXd extended_mass() const;

  /// Pre-mass forcing: (r_c, r_omega, gamma').
  void forcing(const Eigen::Ref<const Eigen::VectorXd>& u, Eigen::Ref<Eigen::VectorXd> r) const;
  [[nodiscard]] Eigen::VectorXd forcing(const Eigen::VectorXd& u) const;
  void rhs(const Eigen::Ref<const Eigen::VectorXd>& u, Eigen::Ref<Eigen::VectorXd> dudt) const;
  [[nodiscard]] Eigen::VectorXd rhs(const Eigen::VectorXd& u) const;
  /// Applies blockdiag(Eh, I)^{-1}.
  [[nodiscard]] Eigen::VectorXd solve_mass(const Eigen::VectorXd& r) const;
  [[nodiscard]] Eigen::MatrixXd solve_mass(const Eigen::MatrixXd& r) const;

  [[nodiscard]] Eigen::MatrixXd forcing_jacobian(const Eigen::VectorXd& u) const;
  [[nodiscard]] Eigen::MatrixXd rhs_jacobian(const Eigen::VectorXd& u) const;

  [[nodiscard]] Vec3 coupling(const Eigen::VectorXd& u) const;  ///< a
  /// K = gamma . (I omega + B^T c)
  [[nodiscard]] double momentum(const Eigen::VectorXd& u) const;
  /// (c, omega)^T Eh (c, omega)
  [[nodiscard]] double kinetic_energy(const Eigen::VectorXd& u) const;
  /// c^T M c - a.Ia + (omega - a).I(omega - a)
  [[nodiscard]] double kinetic_energy_split(const Eigen::VectorXd& u) const;
  /// U = -2 beta^2 gamma . e3
  [[nodiscard]] double potential(const Eigen::VectorXd& u) const;
  /// 2 c^T S c
  [[nodiscard]] double dissipation_rate(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  /// sqrt(du^T blockdiag(Eh, I) du)
  [[nodiscard]] double energy_norm(const Eigen::VectorXd& du) const;

 private:
  BodyParams params_;
  BasisPtr basis_;
  int n_ = 0;
  Eigen::MatrixXd eh_;
  Eigen::LLT<Eigen::MatrixXd> eh_llt_;
};

/// Derivative of a single state; builds a model on every call.
[[nodiscard]] SystemState rhs_semidiscrete(const SystemState& s, const BodyParams& params,
                                           BasisPtr basis);

struct Trajectory {
  int n = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> gamma_norm;
  std::vector<double> momentum;
  std::vector<double> kinetic;
  std::vector<double> potential;
  std::vector<double> dissipated;  ///< D(t) = int_0^t 2 c^T S c
  IntegrationStats stats;
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] SystemState state(std::size_t i) const { return unpack(states[i], n); }
};

[[nodiscard]] Trajectory integrate(const RigidFluidModel& model, const SystemState& s0,
                                   std::span<const double> sample_times,
                                   const IntegratorOptions& options = {});
[[nodiscard]] Trajectory integrate(const RigidFluidModel& model, const SystemState& s0,
                                   double t_end, std::size_t intervals,
                                   const IntegratorOptions& options = {});

/// Fills every monitor column from the states; used by integrate.
void compute_monitors(Trajectory& traj, const RigidFluidModel& model);

struct InvariantReport {
  double k0 = 0.0;
  double max_gamma_drift = 0.0;  ///< max ||gamma| - 1|
  double max_k_drift = 0.0;      ///< max |K(t) - K(0)|
  double threshold = 0.0;
  bool passed = false;
};

/// threshold <= 0 selects 100x the default integrator tolerance.
[[nodiscard]] InvariantReport monitor_invariants(const Trajectory& traj, double threshold = 0.0);

struct EnergyReport {
  double initial_total = 0.0;         ///< E(0) + U(0)
  double max_split_mismatch = 0.0;    ///< |E quadratic form - E split form|
  double max_rate_residual = 0.0;     ///< max |d(E+U)/dt + 2 c^T S c| from the rhs
  double max_balance_residual = 0.0;  ///< max_t |E+U(t) - E+U(0) + D(t)|
  double max_pair_residual = 0.0;     ///< same balance between consecutive samples
  double max_increase = 0.0;          ///< largest rise of E+U between samples
  double tolerance = 0.0;
  bool balance_ok = false;
  bool monotone = false;
};

/// relative_tol scales |E(0) + U(0)| (or 1 if that vanishes).
[[nodiscard]] EnergyReport monitor_energy(const Trajectory& traj, const RigidFluidModel& model,
                                          double relative_tol = 1e-6);

struct LyapunovReport {
  double delta_hat = 0.0;
  double delta_consistency = 0.0;  ///< |alpha^2 I q + beta^2 e3 - delta_hat q|
  std::vector<double> functional;  ///< G at each sample
  double max_step_residual = 0.0;  ///< max |dG/2dt + mean c^T S c| over steps
  double tolerance = 1e-7;
  bool consistent = false;
  bool passed = false;
};

/// Solves alpha^2 I q + beta^2 e3 = delta q in the least-squares sense.
[[nodiscard]] double lyapunov_delta(double alpha, const Vec3& q, const BodyParams& params);

/// Evaluates the Lyapunov functional on a perturbation (dc, domega, z).
[[nodiscard]] double lyapunov_functional(const Eigen::VectorXd& perturbation, double alpha,
                                         double delta_hat, const RigidFluidModel& model);

/// Monitors G along perturbations produced by the linearized flow at the
/// steady spin (alpha, q).
[[nodiscard]] LyapunovReport lyapunov_monitor(std::span<const double> times,
                                              const std::vector<Eigen::VectorXd>& perturbations,
                                              double alpha, const Vec3& q,
                                              const RigidFluidModel& model,
                                              double tolerance = 1e-7,
                                              double consistency_tol = 1e-10);

/// Columns t, c_1..c_N, omega_1..3, gamma_1..3, gammanorm, K, E, U, D.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj);

}  // namespace fluidtop
