#include "fluidtop/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fluidtop {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  // Golub-Welsch: eigen-decomposition of the Jacobi matrix of Legendre polynomials.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    rule.weights[static_cast<std::size_t>(k)] = 2.0 * v0 * v0;
  }
  return rule;
}

BallQuadrature make_ball_quadrature(int degree) {
  if (degree < 0) throw std::invalid_argument("make_ball_quadrature: negative degree");
  // r^(d+2) must be exact radially, degree-d spherical polynomials exact in angle.
  const int n_r = (degree + 3) / 2 + 1;
  const int n_theta = (degree + 2) / 2;
  const int n_phi = degree + 1;

  const GaussRule gr = gauss_legendre(n_r);
  const GaussRule gt = gauss_legendre(std::max(n_theta, 1));
  const double dphi = 2.0 * std::numbers::pi / n_phi;

  BallQuadrature q;
  q.degree = degree;
  q.nodes.reserve(gr.nodes.size() * gt.nodes.size() * static_cast<std::size_t>(n_phi));
  q.weights.reserve(q.nodes.capacity());
  for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
    const double r = 0.5 * (gr.nodes[i] + 1.0);
    const double wr = 0.5 * gr.weights[i] * r * r;
    for (std::size_t j = 0; j < gt.nodes.size(); ++j) {
      const double ct = gt.nodes[j];
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int k = 0; k < n_phi; ++k) {
        const double phi = (k + 0.5) * dphi;
        q.nodes.emplace_back(r * st * std::cos(phi), r * st * std::sin(phi), r * ct);
        q.weights.push_back(wr * gt.weights[j] * dphi);
      }
    }
  }
  return q;
}

}  // namespace fluidtop
