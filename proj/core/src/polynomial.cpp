#include "fluidtop/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace fluidtop {

Polynomial Polynomial::constant(double c) { return monomial({0, 0, 0}, c); }

Polynomial Polynomial::monomial(const Exponents& e, double coef) {
  Polynomial p;
  if (coef != 0.0) p.terms_[e] = coef;
  return p;
}

Polynomial Polynomial::coordinate(int axis) {
  Exponents e{0, 0, 0};
  e[static_cast<std::size_t>(axis)] = 1;
  return monomial(e);
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) terms_[e] += c;
  prune();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) terms_[e] -= c;
  prune();
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (auto& [e, c] : terms_) c *= s;
  prune();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial r;
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      r.terms_[{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}] += ca * cb;
    }
  }
  r.prune();
  return r;
}

Polynomial Polynomial::derivative(int axis) const {
  Polynomial r;
  const auto k = static_cast<std::size_t>(axis);
  for (const auto& [e, c] : terms_) {
    if (e[k] == 0) continue;
    Exponents d = e;
    d[k] -= 1;
    r.terms_[d] += c * e[k];
  }
  r.prune();
  return r;
}

double Polynomial::operator()(const Vec3& x) const {
  const int n = degree();
  if (n < 0) return 0.0;
  std::array<std::array<double, 32>, 3> pw{};
  const int cap = std::min(n, 31);
  for (int a = 0; a < 3; ++a) {
    pw[a][0] = 1.0;
    for (int k = 1; k <= cap; ++k) pw[a][k] = pw[a][k - 1] * x(a);
  }
  double s = 0.0;
  for (const auto& [e, c] : terms_) {
    s += c * pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]];
  }
  return s;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

bool Polynomial::is_zero(double tol) const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [tol](const auto& t) { return std::abs(t.second) <= tol; });
}

void Polynomial::prune() {
  std::erase_if(terms_, [](const auto& t) { return t.second == 0.0; });
}

PolyField curl(const PolyField& f) {
  return {f[2].derivative(1) - f[1].derivative(2),
          f[0].derivative(2) - f[2].derivative(0),
          f[1].derivative(0) - f[0].derivative(1)};
}

Polynomial divergence(const PolyField& f) {
  return f[0].derivative(0) + f[1].derivative(1) + f[2].derivative(2);
}

Vec3 evaluate(const PolyField& f, const Vec3& x) { return {f[0](x), f[1](x), f[2](x)}; }

Mat3 evaluate_gradient(const PolyField& f, const Vec3& x) {
  Mat3 g;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) g(a, b) = f[static_cast<std::size_t>(a)].derivative(b)(x);
  }
  return g;
}

int degree(const PolyField& f) {
  return std::max({f[0].degree(), f[1].degree(), f[2].degree()});
}

}  // namespace fluidtop
