#pragma once

#include "fluidtop/dynamics.hpp"
#include "fluidtop/galerkin.hpp"

#include <cmath>
#include <map>
#include <random>

namespace fluidtop::test {

inline BodyParams standard_params(double nu = 0.5) {
  BodyParams p;
  p.lambda = Vec3(1.0, 2.0, 3.0);
  p.beta2 = 1.0;
  p.rho = 0.5;
  p.nu = nu;
  return p;
}

// Bases are shared across tests; building one costs up to a few tens of ms.
inline BasisPtr shared_basis(int n, double nu = 0.5) {
  static std::map<std::pair<int, double>, BasisPtr> cache;
  auto& slot = cache[{n, nu}];
  if (!slot) slot = std::make_shared<const GalerkinBasis>(build_ball_basis(n, 0, standard_params(nu)));
  return slot;
}

inline RigidFluidModel standard_model(int n = 8, double nu = 0.5) {
  return RigidFluidModel(standard_params(nu), shared_basis(n, nu));
}

inline Eigen::VectorXd random_vector(int d, unsigned seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = dist(gen);
  return v;
}

inline Eigen::VectorXd random_state(const RigidFluidModel& model, unsigned seed, double c_scale = 0.1) {
  const int n = model.basis_size();
  Eigen::VectorXd u = random_vector(model.dim(), seed);
  u.head(n) *= c_scale;
  u.tail<3>().normalize();
  return u;
}

// Exact integral of x^a y^b z^c over the unit ball.
inline double ball_monomial_integral(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  const double s = a + b + c + 3.0;
  return 2.0 * std::tgamma((a + 1) / 2.0) * std::tgamma((b + 1) / 2.0) * std::tgamma((c + 1) / 2.0) /
         (std::tgamma(s / 2.0) * s);
}

inline double ball_integral(const Polynomial& p) {
  double sum = 0.0;
  for (const auto& [e, coef] : p.terms()) sum += coef * ball_monomial_integral(e[0], e[1], e[2]);
  return sum;
}

// Central-difference Jacobian of f at u.
template <class F>
Eigen::MatrixXd fd_jacobian(F&& f, const Eigen::VectorXd& u, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(u);
  Eigen::MatrixXd j(f0.size(), u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    Eigen::VectorXd up = u, um = u;
    up[k] += h;
    um[k] -= h;
    j.col(k) = (f(up) - f(um)) / (2.0 * h);
  }
  return j;
}

}  // namespace fluidtop::test
