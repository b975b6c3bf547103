#pragma once

#include "fluidtop/body.hpp"
#include "fluidtop/polynomial.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fluidtop {

class BasisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Residuals of the structural identities checked after every build.
struct BasisDiagnostics {
  double mass_asymmetry = 0.0;
  double coriolis_skew = 0.0;     ///< max_i max |G_i + G_i^T|
  double convection_skew = 0.0;   ///< max |C_jkl + C_lkj|
  double mass_min_eigenvalue = 0.0;
};

/// Divergence-free polynomial fields on the unit ball, vanishing on the sphere,
/// together with every coupling tensor of the semi-discrete equations of motion.
///
/// Fields are orthonormal in the rho-weighted L2 inner product, so the mass
/// matrix is the identity up to round-off; it is still stored and used.
struct GalerkinBasis {
  int quad_degree = 0;
  int field_degree = 0;
  std::size_t node_count = 0;
  double rho = 1.0;
  double nu = 0.1;

  Eigen::MatrixXd mass;        ///< M_jk = rho int psi_j . psi_k
  Eigen::MatrixXd stiffness;   ///< S_jk = mu int grad psi_j : grad psi_k
  Eigen::MatrixXd moment;      ///< B_ji = rho int psi_j . (e_i x x), N x 3
  std::array<Eigen::MatrixXd, 3> coriolis;  ///< G^(i)_jk = rho int (e_i x psi_k) . psi_j
  std::vector<Eigen::MatrixXd> convection;  ///< convection[j](k, l) = rho int (psi_k . grad psi_l) . psi_j
  std::vector<PolyField> fields;
  BasisDiagnostics diagnostics;

  [[nodiscard]] int size() const { return static_cast<int>(fields.size()); }

  /// Conv(c, c)_j = sum_kl C_jkl c_k c_l
  [[nodiscard]] Eigen::VectorXd convect(const Eigen::VectorXd& c) const;
  /// d Conv(c, c) / dc
  [[nodiscard]] Eigen::MatrixXd convect_jacobian(const Eigen::VectorXd& c) const;
  /// sum_i w_i G^(i)
  [[nodiscard]] Eigen::MatrixXd coriolis_along(const Vec3& w) const;

  [[nodiscard]] Vec3 field_value(int j, const Vec3& x) const;
  [[nodiscard]] Mat3 field_gradient(int j, const Vec3& x) const;
  /// Reconstructed relative velocity v(x) = sum_j c_j psi_j(x).
  [[nodiscard]] Vec3 velocity(const Eigen::VectorXd& c, const Vec3& x) const;
};

using BasisPtr = std::shared_ptr<const GalerkinBasis>;

/// Largest N the construction family (vector potentials of degree <= 3) supports.
[[nodiscard]] int max_basis_size();
/// Polynomial degree of the fields needed to provide n independent members.
[[nodiscard]] int field_degree_for(int n);
/// Smallest product-rule degree that integrates every tensor entry exactly.
[[nodiscard]] int required_quad_degree(int n);

/// quad_degree <= 0 selects required_quad_degree(n).
[[nodiscard]] GalerkinBasis build_ball_basis(int n, int quad_degree, const BodyParams& params);

/// a = -I^{-1} B^T c, the rigid-rotation offset induced by the relative flow.
[[nodiscard]] Vec3 coupling_a(const GalerkinBasis& basis, const BodyParams& params,
                              const Eigen::VectorXd& c);

/// Symmetric block [[M, B], [B^T, I]] coupling fluid and rigid accelerations.
struct MassBlock {
  Eigen::MatrixXd eh;
  double min_eigenvalue = 0.0;
};

[[nodiscard]] MassBlock assemble_mass_block(const GalerkinBasis& basis, const BodyParams& params);

// Binary tensor cache keyed by (N, quad degree, rho, nu).

[[nodiscard]] std::filesystem::path basis_cache_file(const std::filesystem::path& dir, int n,
                                                     int quad_degree, const BodyParams& params);
void save_basis_cache(const std::filesystem::path& file, const GalerkinBasis& basis);
/// Returns nullopt if the file is missing, unreadable, or keyed differently.
[[nodiscard]] std::optional<GalerkinBasis> load_basis_cache(const std::filesystem::path& file, int n,
                                                            int quad_degree,
                                                            const BodyParams& params);
/// Loads from cache_dir when possible, otherwise builds and (if cache_dir is set) stores.
[[nodiscard]] BasisPtr build_or_load_basis(int n, int quad_degree, const BodyParams& params,
                                           const std::filesystem::path& cache_dir = {});

}  // namespace fluidtop
