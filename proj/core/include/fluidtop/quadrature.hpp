#pragma once

#include "fluidtop/body.hpp"

#include <vector>

namespace fluidtop {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

[[nodiscard]] GaussRule gauss_legendre(int n);

/// Product rule on the unit ball: Gauss in r (with the r^2 Jacobian folded in),
/// Gauss in cos(theta), and an equispaced rule in phi. Integrates every
/// polynomial of total degree <= degree exactly.
struct BallQuadrature {
  int degree = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

[[nodiscard]] BallQuadrature make_ball_quadrature(int degree);

}  // namespace fluidtop
