#pragma once

#include "fluidtop/dynamics.hpp"
#include "fluidtop/ode.hpp"
#include "fluidtop/spectral.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fluidtop {

/// Finite-dimensional u' = f(u) viewed through the abstract problem u' + Au = F(u).
struct SemilinearSystem {
  int dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> rhs;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;  ///< of rhs
  /// SPD weight defining the distance norm; empty means Euclidean.
  Eigen::MatrixXd weight;
  /// Pulls a nearly steady state onto the equilibrium set; defaults to min-norm Newton.
  std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)> refine;
  /// Tangent space of the equilibrium manifold at an equilibrium.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> tangent;

  [[nodiscard]] double norm(const Eigen::VectorXd& v) const;
  /// -jacobian(u), so the linearized flow is u' = -L u.
  [[nodiscard]] Eigen::MatrixXd linearization(const Eigen::VectorXd& u) const;
};

/// Max entry difference between the analytic Jacobian and central differences.
[[nodiscard]] double jacobian_fd_mismatch(const SemilinearSystem& sys, const Eigen::VectorXd& u,
                                          double h = 1e-5);

/// Newton iteration with minimum-norm steps; stays close to the guess along a manifold of equilibria.
[[nodiscard]] std::optional<Eigen::VectorXd> min_norm_newton(const SemilinearSystem& sys,
                                                             const Eigen::VectorXd& guess,
                                                             double tol = 1e-12, int max_iter = 50);

/// Adapter for the rigid body with fluid-filled cavity; the norm is the energy norm.
[[nodiscard]] SemilinearSystem make_system(const RigidFluidModel& model);

/// x' = 0, y' = y^2 - y; equilibria are the lines y = 0 and y = 1.
[[nodiscard]] SemilinearSystem toy_system();

/// Orthonormal basis of range(P).
[[nodiscard]] Eigen::MatrixXd range_basis(const Eigen::MatrixXd& p, double tol = 1e-8);

struct ManifoldSample {
  Eigen::VectorXd base;
  Eigen::MatrixXd center_basis;           ///< d x m, orthonormal, spans range(P^c)
  std::vector<Eigen::VectorXd> points;    ///< converged equilibria
  std::vector<Eigen::VectorXd> coords;    ///< center coordinates of each point
  int failures = 0;
};

/// Newton-corrects base + x for x on a grid in the center space (|x| <= radius,
/// `count` nodes per axis), moving only in the complementary spectral subspace.
[[nodiscard]] ManifoldSample sample_equilibrium_manifold(const SemilinearSystem& sys, const Eigen::VectorXd& base,
                                                         const SpectralSplit& split, double radius, int count,
                                                         double tol = 1e-12);

/// phi(xi) = A xi + sum_{a <= b} Q_ab xi_a xi_b with values in the ambient space.
struct QuadraticMap {
  Eigen::MatrixXd coeffs;  ///< d x (m + m(m+1)/2)
  int m = 0;

  [[nodiscard]] Eigen::VectorXd operator()(const Eigen::VectorXd& xi) const;
  [[nodiscard]] Eigen::MatrixXd linear() const { return coeffs.leftCols(m); }
  [[nodiscard]] static Eigen::VectorXd features(const Eigen::VectorXd& xi);
};

struct Flattening {
  Eigen::VectorXd base;
  Eigen::MatrixXd center_basis;
  QuadraticMap phi_s;
  QuadraticMap phi_u;
  double fit_residual = 0.0;        ///< max reconstruction error over the sample
  double rms_residual = 0.0;
  double derivative_norm = 0.0;     ///< max(|phi_s'(0)|, |phi_u'(0)|)
  double validity_radius = 0.0;
  double equation_residual = 0.0;   ///< max |rhs| at reconstructed sample points (when a system is given)
};

/// Least-squares quadratic fit of the stable and unstable parts of the sample
/// against its center coordinates. Throws std::runtime_error on a rank-deficient design.
[[nodiscard]] Flattening fit_flattening(const ManifoldSample& sample, const SpectralSplit& split,
                                        const SemilinearSystem* sys = nullptr);

struct NormalCoordinates {
  Eigen::VectorXd x, y, z;
};

/// x = P^c(u - base), y = P^s(u - base) - phi_s, z = P^u(u - base) - phi_u.
/// Throws std::out_of_range outside the validity radius.
[[nodiscard]] NormalCoordinates normal_coordinates(const Eigen::VectorXd& u, const Flattening& flat,
                                                   const SpectralSplit& split);
[[nodiscard]] Eigen::VectorXd reconstruct(const NormalCoordinates& nc, const Flattening& flat);

struct DecayWindow {
  double drop_fraction = 1e-2;  ///< window opens once the distance falls below this fraction of its start
  double tail_fraction = 0.5;   ///< fraction of the remaining samples used
  double noise_floor = 1e-9;    ///< distances below this are discarded
  double r2_threshold = 0.99;
  double terminal_rhs_tol = 1e-6;
};

struct DecayCertificate {
  bool converged = false;
  bool clean = false;  ///< R^2 above threshold
  std::string message;
  Eigen::VectorXd u_inf;
  double initial_distance = 0.0;
  double rate = 0.0;     ///< fitted k in |u - u_inf| ~ C exp(-k t)
  double r2 = 0.0;
  double gamma_s = 0.0;  ///< stable spectral gap at u_inf
  double ratio = 0.0;    ///< rate / gamma_s
  double window_start = 0.0;
  double window_end = 0.0;
  std::size_t window_samples = 0;
  std::vector<double> distance;  ///< |u(t_i) - u_inf| per sample
};

[[nodiscard]] DecayCertificate certify_decay(std::span<const double> times,
                                             const std::vector<Eigen::VectorXd>& states,
                                             const SemilinearSystem& sys, const DecayWindow& window = {});

struct ToyReport {
  Classification stable_line;      ///< at (x, 0)
  Classification hyperbolic_line;  ///< at (x, 1)
  Eigen::VectorXd converging_terminal;
  DecayCertificate converging_certificate;
  bool blowup = false;
  double blowup_time = 0.0;
  double predicted_blowup_time = 0.0;
  double max_distance_from_equilibria = 0.0;
  bool escaped = false;  ///< left the rho-neighbourhood of the equilibrium set
  double rho = 0.25;
  Eigen::VectorXd fixed_terminal;
  Flattening flattening;  ///< at (0, 1)
};

struct ToyOptions {
  double x0 = 0.0;
  double converging_y0 = 0.5;
  double escaping_y0 = 1.1;
  double fixed_x0 = 0.3;
  double t_end = 25.0;
  double rho = 0.25;
  IntegratorOptions integrator{};
};

[[nodiscard]] ToyReport toy_example_run(const ToyOptions& options = {});

}  // namespace fluidtop
