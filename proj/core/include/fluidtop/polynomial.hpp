#pragma once

#include "fluidtop/body.hpp"

#include <array>
#include <map>

namespace fluidtop {

using Exponents = std::array<int, 3>;

/// Sparse real polynomial in (x, y, z).
class Polynomial {
 public:
  Polynomial() = default;

  static Polynomial constant(double c);
  static Polynomial monomial(const Exponents& e, double coef = 1.0);
  static Polynomial coordinate(int axis);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  [[nodiscard]] Polynomial derivative(int axis) const;
  [[nodiscard]] double operator()(const Vec3& x) const;
  [[nodiscard]] int degree() const;
  [[nodiscard]] bool is_zero(double tol = 0.0) const;
  [[nodiscard]] const std::map<Exponents, double>& terms() const { return terms_; }

 private:
  void prune();
  std::map<Exponents, double> terms_;
};

using PolyField = std::array<Polynomial, 3>;

[[nodiscard]] PolyField curl(const PolyField& f);
[[nodiscard]] Polynomial divergence(const PolyField& f);
[[nodiscard]] Vec3 evaluate(const PolyField& f, const Vec3& x);
/// Jacobian J(a, b) = d f_a / d x_b.
[[nodiscard]] Mat3 evaluate_gradient(const PolyField& f, const Vec3& x);
[[nodiscard]] int degree(const PolyField& f);

}  // namespace fluidtop
