#include "fluidtop/galerkin.hpp"

#include "fluidtop/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace fluidtop {
namespace {

constexpr int kMaxPotentialDegree = 3;
constexpr double kDependenceTol = 1e-9;
constexpr double kSelfCheckTol = 1e-10;

// Independent fields obtainable from vector potentials of degree <= d.
// The curl of (1-r^2)^2 p vanishes exactly for p = -6 x g + (1-r^2) grad g, deg g <= d-1.
int family_size(int d) {
  auto binom3 = [](int m) { return m < 3 ? 0 : m * (m - 1) * (m - 2) / 6; };
  return 3 * binom3(d + 3) - binom3(d + 2);
}

Polynomial bubble() {
  Polynomial s = Polynomial::constant(1.0);
  for (int a = 0; a < 3; ++a) s -= Polynomial::coordinate(a) * Polynomial::coordinate(a);
  return s * s;
}

std::vector<PolyField> candidate_fields(int potential_degree) {
  const Polynomial f = bubble();
  std::vector<PolyField> out;
  for (int d = 0; d <= potential_degree; ++d) {
    for (int a = d; a >= 0; --a) {
      for (int b = d - a; b >= 0; --b) {
        const int c = d - a - b;
        const Polynomial m = Polynomial::monomial({a, b, c});
        for (std::size_t i = 0; i < 3; ++i) {
          PolyField p;
          p[i] = f * m;
          out.push_back(curl(p));
        }
      }
    }
  }
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

int max_basis_size() { return family_size(kMaxPotentialDegree); }

int field_degree_for(int n) {
  if (n <= 0) return 0;
  for (int d = 0; d <= kMaxPotentialDegree; ++d) {
    if (family_size(d) >= n) return d + 3;
  }
  std::ostringstream msg;
  msg << "basis size " << n << " exceeds the construction family size " << max_basis_size();
  throw BasisError(msg.str());
}

int required_quad_degree(int n) { return n <= 0 ? 0 : 3 * field_degree_for(n) - 1; }

Eigen::VectorXd GalerkinBasis::convect(const Eigen::VectorXd& c) const {
  Eigen::VectorXd out(size());
  for (int j = 0; j < size(); ++j) out(j) = c.dot(convection[static_cast<std::size_t>(j)] * c);
  return out;
}

Eigen::MatrixXd GalerkinBasis::convect_jacobian(const Eigen::VectorXd& c) const {
  Eigen::MatrixXd jac(size(), size());
  for (int j = 0; j < size(); ++j) {
    const auto& cj = convection[static_cast<std::size_t>(j)];
    jac.row(j) = ((cj + cj.transpose()) * c).transpose();
  }
  return jac;
}

Eigen::MatrixXd GalerkinBasis::coriolis_along(const Vec3& w) const {
  return w.x() * coriolis[0] + w.y() * coriolis[1] + w.z() * coriolis[2];
}

Vec3 GalerkinBasis::field_value(int j, const Vec3& x) const {
  return evaluate(fields.at(static_cast<std::size_t>(j)), x);
}

Mat3 GalerkinBasis::field_gradient(int j, const Vec3& x) const {
  return evaluate_gradient(fields.at(static_cast<std::size_t>(j)), x);
}

Vec3 GalerkinBasis::velocity(const Eigen::VectorXd& c, const Vec3& x) const {
  Vec3 v = Vec3::Zero();
  for (int j = 0; j < size(); ++j) v += c(j) * field_value(j, x);
  return v;
}

GalerkinBasis build_ball_basis(int n, int quad_degree, const BodyParams& params) {
  if (n < 0) throw BasisError("basis size must be non-negative");
  if (!(params.rho > 0.0) || !(params.nu > 0.0)) throw BasisError("rho and nu must be positive");

  GalerkinBasis basis;
  basis.rho = params.rho;
  basis.nu = params.nu;
  for (auto& g : basis.coriolis) g.resize(n, n);
  basis.mass.resize(n, n);
  basis.stiffness.resize(n, n);
  basis.moment.resize(n, 3);
  if (n == 0) {
    basis.quad_degree = std::max(quad_degree, 0);
    return basis;
  }

  const int fdeg = field_degree_for(n);
  const int need = 3 * fdeg - 1;
  if (quad_degree <= 0) quad_degree = need;
  if (quad_degree < need) {
    std::ostringstream msg;
    msg << "quadrature degree " << quad_degree << " is insufficient for N=" << n
        << " (fields of degree " << fdeg << " need >= " << need << ")";
    throw BasisError(msg.str());
  }
  basis.quad_degree = quad_degree;
  basis.field_degree = fdeg;

  const BallQuadrature quad = make_ball_quadrature(quad_degree);
  const auto nodes = static_cast<Eigen::Index>(quad.size());
  basis.node_count = quad.size();

  const std::vector<PolyField> cands = candidate_fields(fdeg - 3);
  const auto nc = static_cast<Eigen::Index>(cands.size());

  // Nodal values (3 rows per node) and gradients (9 rows per node, row-major d_b psi_a).
  Eigen::MatrixXd vals(3 * nodes, nc);
  Eigen::MatrixXd grads(9 * nodes, nc);
  for (Eigen::Index c = 0; c < nc; ++c) {
    const PolyField& fld = cands[static_cast<std::size_t>(c)];
    std::array<Polynomial, 9> d;
    for (std::size_t a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) d[a * 3 + static_cast<std::size_t>(b)] = fld[a].derivative(b);
    }
    for (Eigen::Index q = 0; q < nodes; ++q) {
      const Vec3& x = quad.nodes[static_cast<std::size_t>(q)];
      for (std::size_t a = 0; a < 3; ++a) vals(3 * q + static_cast<Eigen::Index>(a), c) = fld[a](x);
      for (std::size_t k = 0; k < 9; ++k) grads(9 * q + static_cast<Eigen::Index>(k), c) = d[k](x);
    }
  }

  // Modified Gram-Schmidt (two passes) in the rho-weighted L2 inner product.
  Eigen::VectorXd sqrt_w(3 * nodes);
  for (Eigen::Index q = 0; q < nodes; ++q) {
    sqrt_w.segment<3>(3 * q).setConstant(std::sqrt(params.rho * quad.weights[static_cast<std::size_t>(q)]));
  }
  const Eigen::MatrixXd weighted = sqrt_w.asDiagonal() * vals;
  Eigen::MatrixXd ortho(3 * nodes, n);
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(nc, n);
  int kept = 0;
  for (Eigen::Index c = 0; c < nc && kept < n; ++c) {
    Eigen::VectorXd v = weighted.col(c);
    Eigen::VectorXd t = Eigen::VectorXd::Zero(nc);
    t(c) = 1.0;
    const double norm0 = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < kept; ++k) {
        const double h = ortho.col(k).dot(v);
        v -= h * ortho.col(k);
        t -= h * coef.col(k);
      }
    }
    const double norm = v.norm();
    if (norm <= kDependenceTol * norm0) continue;
    ortho.col(kept) = v / norm;
    coef.col(kept) = t / norm;
    ++kept;
  }
  if (kept < n) throw BasisError("construction family is rank deficient");

  basis.fields.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    PolyField& fld = basis.fields[static_cast<std::size_t>(j)];
    for (Eigen::Index c = 0; c < nc; ++c) {
      const double t = coef(c, j);
      if (t == 0.0) continue;
      for (std::size_t a = 0; a < 3; ++a) fld[a] += t * cands[static_cast<std::size_t>(c)][a];
    }
  }

  const Eigen::MatrixXd psi = vals * coef;    // 3*nodes x n
  const Eigen::MatrixXd dpsi = grads * coef;  // 9*nodes x n

  basis.mass.setZero();
  basis.stiffness.setZero();
  basis.moment.setZero();
  for (auto& g : basis.coriolis) g.setZero();
  basis.convection.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));

  const double mu = params.mu();
  Eigen::MatrixXd rot(3, 3);
  for (Eigen::Index q = 0; q < nodes; ++q) {
    const double w = quad.weights[static_cast<std::size_t>(q)];
    const Vec3& x = quad.nodes[static_cast<std::size_t>(q)];
    const auto values = psi.middleRows(3 * q, 3);   // 3 x n
    const auto gvals = dpsi.middleRows(9 * q, 9);   // 9 x n

    basis.mass.noalias() += (params.rho * w) * values.transpose() * values;
    basis.stiffness.noalias() += (mu * w) * gvals.transpose() * gvals;
    for (int i = 0; i < 3; ++i) {
      const Vec3 ei_x = Vec3::Unit(i).cross(x);
      basis.moment.col(i).noalias() += (params.rho * w) * values.transpose() * ei_x;
      const Eigen::MatrixXd ei_psi = skew(Vec3::Unit(i)) * values;  // e_i x psi_k
      basis.coriolis[static_cast<std::size_t>(i)].noalias() +=
          (params.rho * w) * values.transpose() * ei_psi;
    }
    for (int l = 0; l < n; ++l) {
      Mat3 grad_l;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) grad_l(a, b) = gvals(3 * a + b, l);
      }
      const Eigen::MatrixXd adv = grad_l * values;  // column k: (psi_k . grad) psi_l
      const Eigen::MatrixXd jk = (params.rho * w) * values.transpose() * adv;  // (j, k)
      for (int j = 0; j < n; ++j) {
        basis.convection[static_cast<std::size_t>(j)].col(l) += jk.row(j).transpose();
      }
    }
  }

  BasisDiagnostics& diag = basis.diagnostics;
  diag.mass_asymmetry = max_abs(basis.mass - basis.mass.transpose());
  for (const auto& g : basis.coriolis) {
    diag.coriolis_skew = std::max(diag.coriolis_skew, max_abs(g + g.transpose()));
  }
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        const double s = basis.convection[static_cast<std::size_t>(j)](k, l) +
                         basis.convection[static_cast<std::size_t>(l)](k, j);
        diag.convection_skew = std::max(diag.convection_skew, std::abs(s));
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(basis.mass, Eigen::EigenvaluesOnly);
  diag.mass_min_eigenvalue = es.eigenvalues().minCoeff();

  if (diag.coriolis_skew > kSelfCheckTol || diag.convection_skew > kSelfCheckTol ||
      diag.mass_asymmetry > kSelfCheckTol) {
    std::ostringstream msg;
    msg << "basis self-check failed (coriolis skew " << diag.coriolis_skew << ", convection skew "
        << diag.convection_skew << "); quadrature degree " << quad_degree
        << " does not integrate the tensors exactly";
    throw BasisError(msg.str());
  }
  if (!(diag.mass_min_eigenvalue > 0.0)) throw BasisError("mass matrix is not positive definite");
  return basis;
}

Vec3 coupling_a(const GalerkinBasis& basis, const BodyParams& params, const Eigen::VectorXd& c) {
  if (c.size() != basis.size()) {
    std::ostringstream msg;
    msg << "coupling_a: coefficient vector has length " << c.size() << ", basis has " << basis.size();
    throw std::invalid_argument(msg.str());
  }
  if (basis.size() == 0) return Vec3::Zero();
  return -inertia_solve(params, basis.moment.transpose() * c);
}

MassBlock assemble_mass_block(const GalerkinBasis& basis, const BodyParams& params) {
  const int n = basis.size();
  MassBlock mb;
  mb.eh.resize(n + 3, n + 3);
  mb.eh.topLeftCorner(n, n) = basis.mass;
  mb.eh.topRightCorner(n, 3) = basis.moment;
  mb.eh.bottomLeftCorner(3, n) = basis.moment.transpose();
  mb.eh.bottomRightCorner(3, 3) = inertia_matrix(params);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mb.eh, Eigen::EigenvaluesOnly);
  mb.min_eigenvalue = es.eigenvalues().minCoeff();
  if (!(mb.min_eigenvalue > 0.0)) {
    std::ostringstream msg;
    msg << "mass block is not positive definite (min eigenvalue " << mb.min_eigenvalue
        << "); the fluid inertia captured by the basis exceeds a principal moment";
    throw BasisError(msg.str());
  }
  return mb;
}

}  // namespace fluidtop
