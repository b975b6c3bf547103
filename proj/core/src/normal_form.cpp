#include "fluidtop/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fluidtop {

double SemilinearSystem::norm(const Eigen::VectorXd& v) const {
  if (weight.size() == 0) return v.norm();
  return std::sqrt(std::max(0.0, v.dot(weight * v)));
}

Eigen::MatrixXd SemilinearSystem::linearization(const Eigen::VectorXd& u) const { return -jacobian(u); }

double jacobian_fd_mismatch(const SemilinearSystem& sys, const Eigen::VectorXd& u, double h) {
  const Eigen::MatrixXd j = sys.jacobian(u);
  double worst = 0.0;
  for (int k = 0; k < sys.dim; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(sys.dim);
    e[k] = h;
    const Eigen::VectorXd col = (sys.rhs(u + e) - sys.rhs(u - e)) / (2.0 * h);
    worst = std::max(worst, (col - j.col(k)).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::optional<Eigen::VectorXd> min_norm_newton(const SemilinearSystem& sys, const Eigen::VectorXd& guess,
                                               double tol, int max_iter) {
  const auto step = [&sys](const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sys.jacobian(x));
    cod.setThreshold(1e-10);
    return Eigen::VectorXd(x - cod.solve(f));
  };
  Eigen::VectorXd u = guess;
  for (int it = 0; it <= max_iter; ++it) {
    Eigen::VectorXd f = sys.rhs(u);
    double r = f.norm();
    if (!std::isfinite(r)) return std::nullopt;
    if (r <= tol) {
      // polish to rounding level
      for (int k = 0; k < 3 && r > 0.0; ++k) {
        const Eigen::VectorXd v = step(u, f);
        const Eigen::VectorXd fv = sys.rhs(v);
        if (!(fv.norm() < r)) break;
        u = v;
        f = fv;
        r = fv.norm();
      }
      return u;
    }
    if (it == max_iter) break;
    u = step(u, f);
  }
  return std::nullopt;
}

SemilinearSystem make_system(const RigidFluidModel& model) {
  auto m = std::make_shared<const RigidFluidModel>(model);
  SemilinearSystem sys;
  sys.dim = m->dim();
  sys.rhs = [m](const Eigen::VectorXd& u) { return m->rhs(u); };
  sys.jacobian = [m](const Eigen::VectorXd& u) { return m->rhs_jacobian(u); };
  sys.weight = m->extended_mass();
  sys.refine = [m](const Eigen::VectorXd& u) -> std::optional<Eigen::VectorXd> {
    const NewtonResult res = newton_refine(unpack(u, m->basis_size()), *m);
    if (!res.converged) return std::nullopt;
    return pack(res.steady.state);
  };
  sys.tangent = [m](const Eigen::VectorXd& u) { return tangent_basis(identify_steady(u, *m), *m); };
  return sys;
}

SemilinearSystem toy_system() {
  SemilinearSystem sys;
  sys.dim = 2;
  sys.rhs = [](const Eigen::VectorXd& u) {
    Eigen::VectorXd d(2);
    d << 0.0, u[1] * u[1] - u[1];
    return d;
  };
  sys.jacobian = [](const Eigen::VectorXd& u) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2, 2);
    j(1, 1) = 2.0 * u[1] - 1.0;
    return j;
  };
  sys.tangent = [](const Eigen::VectorXd&) { return Eigen::MatrixXd(Eigen::Vector2d(1.0, 0.0)); };
  return sys;
}

Eigen::MatrixXd range_basis(const Eigen::MatrixXd& p, double tol) {
  if (p.size() == 0) return Eigen::MatrixXd(p.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p, Eigen::ComputeFullU);
  const Eigen::VectorXd sv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv[r] > tol) ++r;
  return svd.matrixU().leftCols(r);
}

namespace {

std::vector<Eigen::VectorXd> center_grid(int m, double radius, int count) {
  std::vector<Eigen::VectorXd> out;
  if (m == 0 || radius <= 0.0 || count <= 1) {
    out.push_back(Eigen::VectorXd::Zero(m));
    return out;
  }
  std::vector<double> axis(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) axis[static_cast<std::size_t>(i)] = -radius + 2.0 * radius * i / (count - 1);
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  while (true) {
    Eigen::VectorXd xi(m);
    for (int a = 0; a < m; ++a) xi[a] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    if (xi.norm() <= radius * (1.0 + 1e-12)) out.push_back(xi);
    int a = 0;
    while (a < m && ++idx[static_cast<std::size_t>(a)] == count) idx[static_cast<std::size_t>(a++)] = 0;
    if (a == m) break;
  }
  return out;
}

}  // namespace

ManifoldSample sample_equilibrium_manifold(const SemilinearSystem& sys, const Eigen::VectorXd& base,
                                           const SpectralSplit& split, double radius, int count, double tol) {
  ManifoldSample ms;
  ms.base = base;
  ms.center_basis = range_basis(split.p_center);
  const auto m = ms.center_basis.cols();
  const auto d = base.size();
  const Eigen::MatrixXd comp = range_basis(Eigen::MatrixXd::Identity(d, d) - split.p_center);
  for (const auto& xi : center_grid(static_cast<int>(m), radius, count)) {
    const Eigen::VectorXd anchor = base + ms.center_basis * xi;
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(comp.cols());
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      const Eigen::VectorXd u = anchor + comp * eta;
      const Eigen::VectorXd f = sys.rhs(u);
      const double r = f.norm();
      if (!std::isfinite(r)) break;
      if (r <= tol) {
        ok = true;
        break;
      }
      const Eigen::MatrixXd jn = sys.jacobian(u) * comp;
      eta -= jn.colPivHouseholderQr().solve(f);
    }
    if (!ok) {
      ++ms.failures;
      continue;
    }
    ms.points.push_back(anchor + comp * eta);
    ms.coords.push_back(xi);
  }
  return ms;
}

Eigen::VectorXd QuadraticMap::features(const Eigen::VectorXd& xi) {
  const auto m = xi.size();
  Eigen::VectorXd f(m + m * (m + 1) / 2);
  f.head(m) = xi;
  Eigen::Index k = m;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a; b < m; ++b) f[k++] = xi[a] * xi[b];
  }
  return f;
}

Eigen::VectorXd QuadraticMap::operator()(const Eigen::VectorXd& xi) const { return coeffs * features(xi); }

Flattening fit_flattening(const ManifoldSample& sample, const SpectralSplit& split, const SemilinearSystem* sys) {
  Flattening fl;
  fl.base = sample.base;
  fl.center_basis = sample.center_basis;
  const auto m = sample.center_basis.cols();
  const auto d = sample.base.size();
  const auto p = m + m * (m + 1) / 2;
  const auto count = static_cast<Eigen::Index>(sample.points.size());
  fl.phi_s.m = fl.phi_u.m = static_cast<int>(m);
  if (count < p || p == 0) throw std::runtime_error("fit_flattening: too few sample points for a quadratic model");

  Eigen::MatrixXd design(count, p), ts(count, d), tu(count, d);
  std::vector<Eigen::VectorXd> xis;
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::VectorXd du = sample.points[static_cast<std::size_t>(i)] - sample.base;
    const Eigen::VectorXd xi = sample.center_basis.transpose() * (split.p_center * du);
    xis.push_back(xi);
    design.row(i) = QuadraticMap::features(xi).transpose();
    ts.row(i) = (split.p_stable * du).transpose();
    tu.row(i) = (split.p_unstable * du).transpose();
  }
  // column-scaled design for the rank test
  Eigen::VectorXd scale = design.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < p; ++k) {
    if (scale[k] == 0.0) throw std::runtime_error("fit_flattening: rank-deficient design");
  }
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) throw std::runtime_error("fit_flattening: rank-deficient design");
  fl.phi_s.coeffs = (scale.cwiseInverse().asDiagonal() * qr.solve(ts)).transpose();
  fl.phi_u.coeffs = (scale.cwiseInverse().asDiagonal() * qr.solve(tu)).transpose();
  fl.derivative_norm = std::max(fl.phi_s.linear().norm(), fl.phi_u.linear().norm());

  std::vector<std::pair<double, double>> by_radius;
  double sum2 = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto& xi = xis[static_cast<std::size_t>(i)];
    const Eigen::VectorXd rec = sample.base + sample.center_basis * xi + fl.phi_s(xi) + fl.phi_u(xi);
    const double r = (rec - sample.points[static_cast<std::size_t>(i)]).norm();
    fl.fit_residual = std::max(fl.fit_residual, r);
    sum2 += r * r;
    by_radius.emplace_back(xi.norm(), r);
    if (sys != nullptr) fl.equation_residual = std::max(fl.equation_residual, sys->rhs(rec).norm());
  }
  fl.rms_residual = std::sqrt(sum2 / static_cast<double>(count));
  std::sort(by_radius.begin(), by_radius.end());
  const double limit = 10.0 * fl.rms_residual + 1e-13 * (1.0 + sample.base.norm());
  for (const auto& [radius, r] : by_radius) {
    if (r > limit) break;
    fl.validity_radius = radius;
  }
  return fl;
}

NormalCoordinates normal_coordinates(const Eigen::VectorXd& u, const Flattening& flat, const SpectralSplit& split) {
  const Eigen::VectorXd du = u - flat.base;
  NormalCoordinates nc;
  nc.x = split.p_center * du;
  const Eigen::VectorXd xi = flat.center_basis.transpose() * nc.x;
  if (xi.norm() > flat.validity_radius * (1.0 + 1e-12)) {
    throw std::out_of_range("normal_coordinates: center component outside the validity radius");
  }
  nc.y = split.p_stable * du - flat.phi_s(xi);
  nc.z = split.p_unstable * du - flat.phi_u(xi);
  return nc;
}

Eigen::VectorXd reconstruct(const NormalCoordinates& nc, const Flattening& flat) {
  const Eigen::VectorXd xi = flat.center_basis.transpose() * nc.x;
  return flat.base + nc.x + nc.y + nc.z + flat.phi_s(xi) + flat.phi_u(xi);
}

DecayCertificate certify_decay(std::span<const double> times, const std::vector<Eigen::VectorXd>& states,
                               const SemilinearSystem& sys, const DecayWindow& window) {
  DecayCertificate cert;
  if (states.empty() || times.size() != states.size()) {
    cert.message = "empty or inconsistent trajectory";
    return cert;
  }
  const Eigen::VectorXd& last = states.back();
  const double terminal_rhs = sys.rhs(last).norm();
  if (!std::isfinite(terminal_rhs) || terminal_rhs > window.terminal_rhs_tol) {
    cert.message = "trajectory has not settled (terminal |rhs| = " + std::to_string(terminal_rhs) + ")";
    return cert;
  }
  const auto refined = sys.refine ? sys.refine(last) : min_norm_newton(sys, last);
  if (!refined) {
    cert.message = "refinement of the terminal state failed";
    return cert;
  }
  cert.converged = true;
  cert.u_inf = *refined;
  cert.gamma_s = spectral_split(sys.linearization(cert.u_inf)).gamma_s;

  cert.distance.reserve(states.size());
  for (const auto& u : states) cert.distance.push_back(sys.norm(u - cert.u_inf));
  cert.initial_distance = cert.distance.front();
  if (cert.initial_distance <= window.noise_floor) {
    cert.message = "trajectory starts at its limit";
    return cert;
  }
  std::size_t i0 = 0;
  while (i0 < states.size() && cert.distance[i0] >= window.drop_fraction * cert.initial_distance) ++i0;
  std::vector<std::size_t> eligible;
  for (std::size_t i = i0; i < states.size(); ++i) {
    if (cert.distance[i] > window.noise_floor) eligible.push_back(i);
  }
  const auto keep = static_cast<std::size_t>(std::ceil(window.tail_fraction * static_cast<double>(eligible.size())));
  if (keep < 3) {
    cert.message = "too few samples in the decay window";
    return cert;
  }
  const std::vector<std::size_t> win(eligible.end() - static_cast<std::ptrdiff_t>(keep), eligible.end());
  double st = 0.0, sy = 0.0;
  for (auto i : win) {
    st += times[i];
    sy += std::log(cert.distance[i]);
  }
  const double n = static_cast<double>(win.size());
  const double mt = st / n, my = sy / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (auto i : win) {
    const double dt = times[i] - mt, dy = std::log(cert.distance[i]) - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  const double slope = sty / stt;
  cert.rate = -slope;
  cert.r2 = syy > 0.0 ? 1.0 - (syy - slope * sty) / syy : 1.0;
  cert.window_start = times[win.front()];
  cert.window_end = times[win.back()];
  cert.window_samples = win.size();
  cert.ratio = std::isfinite(cert.gamma_s) && cert.gamma_s > 0.0 ? cert.rate / cert.gamma_s : 0.0;
  cert.clean = cert.r2 >= window.r2_threshold;
  cert.message = cert.clean ? "exponential decay certified" : "no clean exponential regime";
  return cert;
}

ToyReport toy_example_run(const ToyOptions& opt) {
  ToyReport rep;
  const SemilinearSystem sys = toy_system();
  const Eigen::MatrixXd tangent = sys.tangent(Eigen::Vector2d(opt.x0, 0.0));
  rep.stable_line = classify_operator(sys.linearization(Eigen::Vector2d(opt.x0, 0.0)), tangent);
  rep.hyperbolic_line = classify_operator(sys.linearization(Eigen::Vector2d(opt.x0, 1.0)), tangent);

  const OdeRhs f = [](Eigen::Ref<const Eigen::VectorXd> u, Eigen::Ref<Eigen::VectorXd> du) {
    du[0] = 0.0;
    du[1] = u[1] * u[1] - u[1];
  };
  const auto times = uniform_times(opt.t_end, static_cast<std::size_t>(std::ceil(opt.t_end * 100.0)));

  const OdeSolution conv = integrate_ode(f, Eigen::Vector2d(opt.x0, opt.converging_y0), times, opt.integrator);
  rep.converging_terminal = conv.states.back();
  rep.converging_certificate = certify_decay(conv.times, conv.states, sys);

  const OdeSolution esc = integrate_ode(f, Eigen::Vector2d(opt.x0, opt.escaping_y0), times, opt.integrator);
  rep.blowup = esc.stats.blowup;
  rep.blowup_time = esc.stats.blowup_time;
  rep.predicted_blowup_time =
      opt.escaping_y0 > 1.0 ? std::log(opt.escaping_y0 / (opt.escaping_y0 - 1.0)) : std::numeric_limits<double>::infinity();
  rep.rho = opt.rho;
  for (const auto& u : esc.states) {
    rep.max_distance_from_equilibria = std::max(rep.max_distance_from_equilibria, std::min(std::abs(u[1]), std::abs(u[1] - 1.0)));
  }
  rep.escaped = rep.max_distance_from_equilibria > opt.rho;

  const OdeSolution fixed = integrate_ode(f, Eigen::Vector2d(opt.fixed_x0, 0.0), times, opt.integrator);
  rep.fixed_terminal = fixed.states.back();

  const Eigen::Vector2d top(opt.x0, 1.0);
  const SpectralSplit split = spectral_split(sys.linearization(top));
  const ManifoldSample sample = sample_equilibrium_manifold(sys, top, split, 0.5, 5);
  rep.flattening = fit_flattening(sample, split, &sys);
  return rep;
}

}  // namespace fluidtop
