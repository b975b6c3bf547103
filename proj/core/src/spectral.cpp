#include "fluidtop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fluidtop {

namespace {

using Complex = std::complex<double>;

Cluster cluster_of(const Complex& z, double eps) {
  if (z.real() > eps) return Cluster::Stable;
  if (z.real() < -eps) return Cluster::Unstable;
  return std::abs(z.imag()) <= eps ? Cluster::Kernel : Cluster::Axis;
}

bool near_boundary(double x, double eps) {
  const double a = std::abs(x);
  return a >= 0.5 * eps && a <= 2.0 * eps;
}

// Swaps diagonal entries k and k+1 of an upper-triangular T by a unitary
// rotation, accumulating it into Q.
void swap_adjacent(Eigen::MatrixXcd& t, Eigen::MatrixXcd& q, Eigen::Index k) {
  const Complex a = t(k, k);
  const Complex b = t(k + 1, k + 1);
  Eigen::JacobiRotation<Complex> g;
  g.makeGivens(t(k, k + 1), b - a);
  t.applyOnTheLeft(k, k + 1, g.adjoint());
  t.applyOnTheRight(k, k + 1, g);
  q.applyOnTheRight(k, k + 1, g);
  t(k + 1, k) = 0.0;
}

// Moves the diagonal entries satisfying `pick` to the leading block; returns its size.
template <class Pick>
Eigen::Index reorder_schur(Eigen::MatrixXcd& t, Eigen::MatrixXcd& q, Pick pick) {
  const Eigen::Index n = t.rows();
  bool moved = true;
  while (moved) {
    moved = false;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      if (!pick(t(k, k)) && pick(t(k + 1, k + 1))) {
        swap_adjacent(t, q, k);
        moved = true;
      }
    }
  }
  Eigen::Index m = 0;
  while (m < n && pick(t(m, m))) ++m;
  return m;
}

Eigen::MatrixXd schur_projector(const Eigen::ComplexSchur<Eigen::MatrixXcd>& right,
                                const Eigen::ComplexSchur<Eigen::MatrixXcd>& left, double eps,
                                Cluster which) {
  const auto n = right.matrixT().rows();
  auto pick = [&](const Complex& z) {
    const Cluster c = cluster_of(z, eps);
    if (which == Cluster::Kernel) return c == Cluster::Kernel || c == Cluster::Axis;
    return c == which;
  };
  Eigen::MatrixXcd tr = right.matrixT(), qr = right.matrixU();
  Eigen::MatrixXcd tl = left.matrixT(), ql = left.matrixU();
  const auto m = reorder_schur(tr, qr, pick);
  const auto ml = reorder_schur(tl, ql, pick);
  if (m == 0) return Eigen::MatrixXd::Zero(n, n);
  if (m != ml) throw std::runtime_error("spectral_split: left and right cluster sizes differ");
  const Eigen::MatrixXcd v = qr.leftCols(m);
  const Eigen::MatrixXcd w = ql.leftCols(m);
  const Eigen::MatrixXcd p = v * (w.adjoint() * v).partialPivLu().solve(w.adjoint());
  return p.real();
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

Eigen::MatrixXd assemble_linearization(const SteadyState& s, const RigidFluidModel& model) {
  const Eigen::VectorXd u = pack(s.state);
  if (u.size() != model.dim()) throw std::invalid_argument("assemble_linearization: state does not match basis size");
  const double res = model.rhs(u).norm();
  if (res > 1e-10) {
    throw std::invalid_argument("assemble_linearization: state is not an equilibrium (|rhs| = " +
                                std::to_string(res) + ")");
  }
  return -model.rhs_jacobian(u);
}

double default_center_tolerance(const Eigen::MatrixXd& l) {
  if (l.size() == 0) return 0.0;
  return 1e-7 * Eigen::JacobiSVD<Eigen::MatrixXd>(l).singularValues()[0];
}

SpectralSplit spectral_split(const Eigen::MatrixXd& l, double eps_c) {
  if (l.rows() != l.cols()) throw std::invalid_argument("spectral_split: matrix must be square");
  SpectralSplit sp;
  const auto n = l.rows();
  sp.eps_c = eps_c > 0.0 ? eps_c : default_center_tolerance(l);
  const double eps = sp.eps_c;

  const Eigen::ComplexSchur<Eigen::MatrixXcd> right(l.cast<Complex>());
  const Eigen::ComplexSchur<Eigen::MatrixXcd> left(l.transpose().cast<Complex>());
  if (right.info() != Eigen::Success || left.info() != Eigen::Success) {
    throw std::runtime_error("spectral_split: Schur decomposition failed");
  }

  std::vector<Complex> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = right.matrixT()(i, i);
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  sp.eigenvalues.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex z = ev[static_cast<std::size_t>(i)];
    sp.eigenvalues[i] = z;
    const Cluster c = cluster_of(z, eps);
    sp.clusters.push_back(c);
    switch (c) {
      case Cluster::Kernel: ++sp.center_dim; break;
      case Cluster::Axis: ++sp.axis_dim; break;
      case Cluster::Stable:
        ++sp.stable_dim;
        sp.gamma_s = std::min(sp.gamma_s, z.real());
        break;
      case Cluster::Unstable:
        ++sp.unstable_dim;
        sp.omega_u = std::min(sp.omega_u, std::abs(z.real()));
        break;
    }
    if (near_boundary(z.real(), eps) || (std::abs(z.real()) <= eps && near_boundary(z.imag(), eps))) {
      sp.straddle = true;
    }
  }
  if (sp.straddle) sp.warnings.push_back("eigenvalue within a factor 2 of the center tolerance");
  if (sp.axis_dim > 0) sp.warnings.push_back("nonzero eigenvalues on the imaginary axis");

  sp.p_center = schur_projector(right, left, eps, Cluster::Kernel);
  sp.p_stable = schur_projector(right, left, eps, Cluster::Stable);
  sp.p_unstable = schur_projector(right, left, eps, Cluster::Unstable);

  Eigen::EigenSolver<Eigen::MatrixXd> es(l);
  if (es.info() == Eigen::Success) {
    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::MatrixXcd vinv = v.inverse();
    const Eigen::VectorXcd lam = es.eigenvalues();
    std::array<Eigen::MatrixXcd, 3> pe;
    for (auto& p : pe) p = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Cluster c = cluster_of(lam[i], eps);
      const std::size_t slot = c == Cluster::Stable ? 1 : c == Cluster::Unstable ? 2 : 0;
      pe[slot] += v.col(i) * vinv.row(i);
    }
    sp.eigenvector_mismatch = std::max({max_abs(pe[0].real() - sp.p_center),
                                        max_abs(pe[1].real() - sp.p_stable),
                                        max_abs(pe[2].real() - sp.p_unstable)});
    if (!std::isfinite(sp.eigenvector_mismatch)) sp.eigenvector_mismatch = std::numeric_limits<double>::infinity();
  } else {
    sp.eigenvector_mismatch = std::numeric_limits<double>::infinity();
  }
  return sp;
}

double ProjectorAlgebra::worst() const {
  return std::max({completeness, idempotence, annihilation, commutation});
}

ProjectorAlgebra projector_algebra(const SpectralSplit& split, const Eigen::MatrixXd& l) {
  ProjectorAlgebra pa;
  const auto n = l.rows();
  const std::array<const Eigen::MatrixXd*, 3> ps{&split.p_center, &split.p_stable, &split.p_unstable};
  pa.completeness = max_abs(*ps[0] + *ps[1] + *ps[2] - Eigen::MatrixXd::Identity(n, n));
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& p = *ps[a];
    pa.idempotence = std::max(pa.idempotence, max_abs(p * p - p));
    pa.commutation = std::max(pa.commutation, max_abs(p * l - l * p));
    for (std::size_t b = 0; b < 3; ++b) {
      if (a != b) pa.annihilation = std::max(pa.annihilation, max_abs(p * *ps[b]));
    }
  }
  return pa;
}

double conjugate_pair_residual(const Eigen::VectorXcd& ev) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < ev.size(); ++j) best = std::min(best, std::abs(std::conj(ev[i]) - ev[j]));
    worst = std::max(worst, best);
  }
  return worst;
}

double imaginary_axis_margin(const SpectralSplit& split) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < split.eigenvalues.size(); ++i) {
    if (split.clusters[static_cast<std::size_t>(i)] != Cluster::Kernel) {
      m = std::min(m, std::abs(split.eigenvalues[i].real()));
    }
  }
  return m;
}

SemisimpleResult semisimple_check(const Eigen::MatrixXd& l, double eps_c) {
  SemisimpleResult r;
  const auto n = l.rows();
  const double eps = eps_c > 0.0 ? eps_c : default_center_tolerance(l);
  const Eigen::ComplexSchur<Eigen::MatrixXcd> schur(l.cast<Complex>());
  Eigen::MatrixXcd t = schur.matrixT(), q = schur.matrixU();
  const auto m = reorder_schur(t, q, [eps](const Complex& z) { return cluster_of(z, eps) == Cluster::Kernel; });
  r.algebraic = static_cast<int>(m);
  // L restricted to the kernel cluster's invariant subspace vanishes iff zero is semi-simple.
  if (m > 0) {
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(t.topLeftCorner(m, m)).singularValues();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (sv[i] <= eps) ++r.geometric;
      if (near_boundary(sv[i], eps)) r.ill_conditioned = true;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(l, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto rank = n - r.geometric;
  Eigen::MatrixXd stacked(n, n);
  stacked << svd.matrixV().rightCols(r.geometric), svd.matrixU().leftCols(rank);
  r.transversality = n > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(stacked).singularValues()[n - 1] : 0.0;
  r.passed = !r.ill_conditioned && r.algebraic == r.geometric && r.transversality > 1e-6;
  return r;
}

Eigen::MatrixXd tangent_basis(const SteadyState& s, const RigidFluidModel& model) {
  const int n = model.basis_size();
  const int d = model.dim();
  const double a = s.alpha;
  const Vec3& q = s.q;
  const Vec3 e1{1.0, 0.0, 0.0};
  const Vec3 e2{0.0, 1.0, 0.0};
  auto column = [&](const Vec3& w, const Vec3& z) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    v.segment<3>(n) = w;
    v.tail<3>() = z;
    return v;
  };
  std::vector<Eigen::VectorXd> cols;
  if (s.family == Family::PR) {
    cols.push_back(column(q[2] * kE3, Vec3::Zero()));
    cols.push_back(column(a * kE3, kE3));
  } else {
    // q3 = h(alpha) with h' = -2 h / alpha
    const Vec3 dq{0.0, 0.0, -2.0 * q[2] / a};
    cols.push_back(column(q + a * dq, dq));
    if (s.family == Family::SP1 || s.family == Family::SP) cols.push_back(column(a * e1, e1));
    if (s.family == Family::SP2 || s.family == Family::SP) cols.push_back(column(a * e2, e2));
  }
  Eigen::MatrixXd t(d, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) t.col(static_cast<Eigen::Index>(i)) = cols[i];
  return t;
}

KernelResidual kernel_residual_check(const SteadyState& s, const RigidFluidModel& model) {
  if (s.family != Family::SP1) throw std::invalid_argument("kernel_residual_check: SP1 steady state required");
  if (s.alpha == 0.0) throw std::invalid_argument("kernel_residual_check: alpha must be nonzero");
  const int n = model.basis_size();
  KernelResidual kr;
  kr.w1 = Eigen::VectorXd::Zero(model.dim());
  kr.w2 = Eigen::VectorXd::Zero(model.dim());
  kr.w1.segment<3>(n) = Vec3{s.q[0], 0.0, -s.q[2]};
  kr.w1.tail<3>() = Vec3{0.0, 0.0, -2.0 / s.alpha * s.q[2]};
  kr.w2.segment<3>(n) = Vec3{s.alpha, 0.0, 0.0};
  kr.w2.tail<3>() = Vec3{1.0, 0.0, 0.0};
  const Eigen::MatrixXd l = assemble_linearization(s, model);
  kr.residual1 = (l * kr.w1).norm() / kr.w1.norm();
  kr.residual2 = (l * kr.w2).norm() / kr.w2.norm();
  return kr;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::NormallyStable: return "NormallyStable";
    case Verdict::NormallyHyperbolic: return "NormallyHyperbolic";
    case Verdict::Degenerate: return "Degenerate";
  }
  return "?";
}

Classification classify_operator(const Eigen::MatrixXd& l, const Eigen::MatrixXd& tangent, double eps_c) {
  Classification c;
  c.split = spectral_split(l, eps_c);
  const double eps = c.split.eps_c;
  c.kernel_dim = c.split.center_dim;
  c.unstable_count = c.split.unstable_dim;
  if (tangent.cols() > 0) {
    const Eigen::VectorXd ts = Eigen::JacobiSVD<Eigen::MatrixXd>(tangent).singularValues();
    for (Eigen::Index i = 0; i < ts.size(); ++i) {
      if (ts[i] > 1e-10 * ts[0]) ++c.tangent_dim;
    }
    for (Eigen::Index i = 0; i < tangent.cols(); ++i) {
      c.tangent_residual = std::max(c.tangent_residual, (l * tangent.col(i)).norm() / tangent.col(i).norm());
    }
  }
  c.semisimple = semisimple_check(l, eps);
  c.axis_margin = imaginary_axis_margin(c.split);

  if (c.kernel_dim != c.tangent_dim) {
    c.reasons.push_back("kernel cluster size " + std::to_string(c.kernel_dim) + " differs from tangent dimension " +
                        std::to_string(c.tangent_dim));
  }
  if (c.tangent_residual > eps) c.reasons.push_back("tangent vectors are not annihilated by L");
  if (!c.semisimple.passed) c.reasons.push_back("zero is not a semi-simple eigenvalue");
  if (c.axis_margin <= eps) c.reasons.push_back("nonzero spectrum on the imaginary axis");
  if (c.split.straddle) c.reasons.push_back("eigenvalue straddles the center tolerance");

  if (c.reasons.empty()) {
    c.verdict = c.unstable_count > 0 ? Verdict::NormallyHyperbolic : Verdict::NormallyStable;
  }
  return c;
}

Classification classify(const SteadyState& s, const RigidFluidModel& model, double eps_c, double gen_margin) {
  const Eigen::MatrixXd l = assemble_linearization(s, model);
  Classification c = classify_operator(l, tangent_basis(s, model), eps_c);
  const GenericityFlags flags = genericity_flags(s, model.params(), gen_margin);
  c.genericity_passed = flags.passed();
  if (!c.genericity_passed) {
    c.reasons.insert(c.reasons.begin(), "genericity condition fails");
    c.verdict = Verdict::Degenerate;
  }
  return c;
}

}  // namespace fluidtop
