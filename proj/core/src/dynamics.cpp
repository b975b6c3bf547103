#include "fluidtop/dynamics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace fluidtop {

namespace {

BasisPtr or_empty(BasisPtr basis, const BodyParams& params) {
  if (basis) return basis;
  return std::make_shared<const GalerkinBasis>(build_ball_basis(0, 0, params));
}

void put_number(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

}  // namespace

Eigen::VectorXd pack(const SystemState& s) {
  const auto n = s.c.size();
  Eigen::VectorXd u(n + 6);
  u.head(n) = s.c;
  u.segment<3>(n) = s.omega;
  u.tail<3>() = s.gamma;
  return u;
}

SystemState unpack(const Eigen::VectorXd& u, int n) {
  if (u.size() != n + 6) throw std::invalid_argument("unpack: state length does not match basis size");
  SystemState s;
  s.c = u.head(n);
  s.omega = u.segment<3>(n);
  s.gamma = u.tail<3>();
  return s;
}

RigidFluidModel::RigidFluidModel(const BodyParams& params, BasisPtr basis)
    : params_(params), basis_(or_empty(std::move(basis), params)), n_(basis_->size()) {
  eh_ = assemble_mass_block(*basis_, params_).eh;
  eh_llt_.compute(eh_);
  if (eh_llt_.info() != Eigen::Success) throw BasisError("mass block factorization failed");
}

Eigen::MatrixXd RigidFluidModel::extended_mass() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim(), dim());
  m.topLeftCorner(n_ + 3, n_ + 3) = eh_;
  return m;
}

void RigidFluidModel::forcing(const Eigen::Ref<const Eigen::VectorXd>& u,
                              Eigen::Ref<Eigen::VectorXd> r) const {
  const auto& b = *basis_;
  const Eigen::VectorXd c = u.head(n_);
  const Vec3 w = u.segment<3>(n_);
  const Vec3 g = u.tail<3>();
  if (n_ > 0) {
    Eigen::VectorXd rc = -b.convect(c) - b.stiffness * c;
    for (int i = 0; i < 3; ++i) rc.noalias() -= 2.0 * w[i] * (b.coriolis[static_cast<std::size_t>(i)] * c);
    r.head(n_) = rc;
  }
  Vec3 ang = inertia_apply(params_, w);
  if (n_ > 0) ang += b.moment.transpose() * c;
  r.segment<3>(n_) = -w.cross(ang) + params_.beta2 * kE3.cross(g);
  r.tail<3>() = -w.cross(g);
}

Eigen::VectorXd RigidFluidModel::forcing(const Eigen::VectorXd& u) const {
  Eigen::VectorXd r(dim());
  forcing(u, r);
  return r;
}

void RigidFluidModel::rhs(const Eigen::Ref<const Eigen::VectorXd>& u,
                          Eigen::Ref<Eigen::VectorXd> dudt) const {
  forcing(u, dudt);
  dudt.head(n_ + 3) = eh_llt_.solve(dudt.head(n_ + 3));
}

Eigen::VectorXd RigidFluidModel::rhs(const Eigen::VectorXd& u) const {
  Eigen::VectorXd d(dim());
  rhs(u, d);
  return d;
}

Eigen::VectorXd RigidFluidModel::solve_mass(const Eigen::VectorXd& r) const {
  Eigen::VectorXd x = r;
  x.head(n_ + 3) = eh_llt_.solve(r.head(n_ + 3));
  return x;
}

Eigen::MatrixXd RigidFluidModel::solve_mass(const Eigen::MatrixXd& r) const {
  Eigen::MatrixXd x = r;
  x.topRows(n_ + 3) = eh_llt_.solve(r.topRows(n_ + 3));
  return x;
}

Eigen::MatrixXd RigidFluidModel::forcing_jacobian(const Eigen::VectorXd& u) const {
  const auto& b = *basis_;
  const Eigen::VectorXd c = u.head(n_);
  const Vec3 w = u.segment<3>(n_);
  const Vec3 g = u.tail<3>();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim(), dim());
  Vec3 ang = inertia_apply(params_, w);
  if (n_ > 0) {
    j.topLeftCorner(n_, n_) = -b.convect_jacobian(c) - 2.0 * b.coriolis_along(w) - b.stiffness;
    for (int i = 0; i < 3; ++i) j.block(0, n_ + i, n_, 1) = -2.0 * (b.coriolis[static_cast<std::size_t>(i)] * c);
    j.block(n_, 0, 3, n_) = -skew(w) * b.moment.transpose();
    ang += b.moment.transpose() * c;
  }
  j.block<3, 3>(n_, n_) = -skew(w) * inertia_matrix(params_) + skew(ang);
  j.block<3, 3>(n_, n_ + 3) = params_.beta2 * skew(kE3);
  j.block<3, 3>(n_ + 3, n_) = skew(g);
  j.block<3, 3>(n_ + 3, n_ + 3) = -skew(w);
  return j;
}

Eigen::MatrixXd RigidFluidModel::rhs_jacobian(const Eigen::VectorXd& u) const {
  return solve_mass(forcing_jacobian(u));
}

Vec3 RigidFluidModel::coupling(const Eigen::VectorXd& u) const {
  return coupling_a(*basis_, params_, u.head(n_));
}

double RigidFluidModel::momentum(const Eigen::VectorXd& u) const {
  Vec3 ang = inertia_apply(params_, u.segment<3>(n_));
  if (n_ > 0) ang += basis_->moment.transpose() * u.head(n_);
  return u.tail<3>().dot(ang);
}

double RigidFluidModel::kinetic_energy(const Eigen::VectorXd& u) const {
  const auto x = u.head(n_ + 3);
  return x.dot(eh_ * x);
}

double RigidFluidModel::kinetic_energy_split(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd c = u.head(n_);
  const Vec3 a = coupling(u);
  const Vec3 ws = u.segment<3>(n_) - a;
  const double fluid = n_ > 0 ? c.dot(basis_->mass * c) : 0.0;
  return fluid - a.dot(inertia_apply(params_, a)) + ws.dot(inertia_apply(params_, ws));
}

double RigidFluidModel::potential(const Eigen::VectorXd& u) const {
  return -2.0 * params_.beta2 * u[n_ + 5];
}

double RigidFluidModel::dissipation_rate(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  if (n_ == 0) return 0.0;
  const auto c = u.head(n_);
  return 2.0 * c.dot(basis_->stiffness * c);
}

double RigidFluidModel::energy_norm(const Eigen::VectorXd& du) const {
  const auto x = du.head(n_ + 3);
  return std::sqrt(std::max(0.0, x.dot(eh_ * x) + du.tail<3>().squaredNorm()));
}

SystemState rhs_semidiscrete(const SystemState& s, const BodyParams& params, BasisPtr basis) {
  const RigidFluidModel model(params, std::move(basis));
  if (s.c.size() != model.basis_size()) {
    throw std::invalid_argument("rhs_semidiscrete: coefficient vector does not match basis size");
  }
  return unpack(model.rhs(pack(s)), model.basis_size());
}

void compute_monitors(Trajectory& traj, const RigidFluidModel& model) {
  const std::size_t m = traj.states.size();
  traj.n = model.basis_size();
  traj.gamma_norm.resize(m);
  traj.momentum.resize(m);
  traj.kinetic.resize(m);
  traj.potential.resize(m);
  // integrate() supplies D from the augmented system; otherwise use the trapezoid rule on the samples.
  const bool have_d = traj.dissipated.size() == m;
  if (!have_d) traj.dissipated.assign(m, 0.0);
  double prev_rate = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& u = traj.states[i];
    traj.gamma_norm[i] = u.tail<3>().norm();
    traj.momentum[i] = model.momentum(u);
    traj.kinetic[i] = model.kinetic_energy(u);
    traj.potential[i] = model.potential(u);
    const double rate = model.dissipation_rate(u);
    if (i > 0 && !have_d) {
      traj.dissipated[i] =
          traj.dissipated[i - 1] + 0.5 * (rate + prev_rate) * (traj.times[i] - traj.times[i - 1]);
    }
    prev_rate = rate;
  }
}

Trajectory integrate(const RigidFluidModel& model, const SystemState& s0,
                     std::span<const double> sample_times, const IntegratorOptions& options) {
  if (s0.c.size() != model.basis_size()) {
    throw std::invalid_argument("integrate: coefficient vector does not match basis size");
  }
  Trajectory traj;
  if (std::abs(s0.gamma.norm() - 1.0) > 1e-12) {
    traj.warnings.push_back("initial |gamma| differs from 1 by more than 1e-12");
  }
  // The last component accumulates the dissipated energy D(t) = int 2 c^T S c.
  const int d = model.dim();
  const OdeRhs f = [&model, d](Eigen::Ref<const Eigen::VectorXd> y, Eigen::Ref<Eigen::VectorXd> dy) {
    model.rhs(y.head(d), dy.head(d));
    dy[d] = model.dissipation_rate(y.head(d));
  };
  Eigen::VectorXd y0(d + 1);
  y0 << pack(s0), 0.0;
  OdeSolution sol = integrate_ode(f, y0, sample_times, options);
  traj.times = std::move(sol.times);
  traj.states.reserve(sol.states.size());
  traj.dissipated.reserve(sol.states.size());
  for (const auto& y : sol.states) {
    traj.states.emplace_back(y.head(d));
    traj.dissipated.push_back(y[d]);
  }
  traj.stats = std::move(sol.stats);
  if (traj.stats.blowup) traj.warnings.push_back("integration stopped: " + traj.stats.message);
  compute_monitors(traj, model);
  return traj;
}

Trajectory integrate(const RigidFluidModel& model, const SystemState& s0, double t_end,
                     std::size_t intervals, const IntegratorOptions& options) {
  const auto times = uniform_times(t_end, intervals);
  return integrate(model, s0, times, options);
}

InvariantReport monitor_invariants(const Trajectory& traj, double threshold) {
  InvariantReport rep;
  rep.threshold = threshold > 0.0 ? threshold : 100.0 * IntegratorOptions{}.abs_tol;
  if (traj.size() == 0) return rep;
  rep.k0 = traj.momentum.front();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    rep.max_gamma_drift = std::max(rep.max_gamma_drift, std::abs(traj.gamma_norm[i] - 1.0));
    rep.max_k_drift = std::max(rep.max_k_drift, std::abs(traj.momentum[i] - rep.k0));
  }
  rep.passed = rep.max_gamma_drift <= rep.threshold && rep.max_k_drift <= rep.threshold;
  return rep;
}

EnergyReport monitor_energy(const Trajectory& traj, const RigidFluidModel& model,
                            double relative_tol) {
  EnergyReport rep;
  if (traj.size() == 0) return rep;
  const int n = model.basis_size();
  rep.initial_total = traj.kinetic.front() + traj.potential.front();
  rep.tolerance = relative_tol * (rep.initial_total != 0.0 ? std::abs(rep.initial_total) : 1.0);
  Eigen::VectorXd r(model.dim());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& u = traj.states[i];
    rep.max_split_mismatch =
        std::max(rep.max_split_mismatch, std::abs(traj.kinetic[i] - model.kinetic_energy_split(u)));
    model.forcing(u, r);
    // d/dt x^T Eh x = 2 x^T Eh x' = 2 x^T r for x = (c, omega)
    const double de = 2.0 * u.head(n + 3).dot(r.head(n + 3));
    const double du = -2.0 * model.params().beta2 * r[n + 5];
    rep.max_rate_residual = std::max(rep.max_rate_residual, std::abs(de + du + model.dissipation_rate(u)));
    const double total = traj.kinetic[i] + traj.potential[i];
    rep.max_balance_residual =
        std::max(rep.max_balance_residual, std::abs(total - rep.initial_total + traj.dissipated[i]));
    if (i > 0) {
      const double prev = traj.kinetic[i - 1] + traj.potential[i - 1];
      const double pair = total - prev + (traj.dissipated[i] - traj.dissipated[i - 1]);
      rep.max_pair_residual = std::max(rep.max_pair_residual, std::abs(pair));
      rep.max_increase = std::max(rep.max_increase, total - prev);
    }
  }
  rep.balance_ok = rep.max_balance_residual <= rep.tolerance;
  rep.monotone = rep.max_increase <= rep.tolerance;
  return rep;
}

double lyapunov_delta(double alpha, const Vec3& q, const BodyParams& params) {
  const Vec3 lhs = alpha * alpha * inertia_apply(params, q) + params.beta2 * kE3;
  return q.dot(lhs) / q.squaredNorm();
}

double lyapunov_functional(const Eigen::VectorXd& p, double alpha, double delta_hat,
                           const RigidFluidModel& model) {
  const int n = model.basis_size();
  const auto& params = model.params();
  const Vec3 a = model.coupling(p);
  const Vec3 ws = p.segment<3>(n) - a;
  const Vec3 z = p.tail<3>();
  const Vec3 iws = inertia_apply(params, ws);
  const double fluid = n > 0 ? p.head(n).dot(model.basis().mass * p.head(n)) : 0.0;
  return fluid - a.dot(inertia_apply(params, a)) + ws.dot(iws) + delta_hat * z.squaredNorm() -
         2.0 * alpha * z.dot(iws);
}

LyapunovReport lyapunov_monitor(std::span<const double> times,
                                const std::vector<Eigen::VectorXd>& perturbations, double alpha,
                                const Vec3& q, const RigidFluidModel& model, double tolerance,
                                double consistency_tol) {
  LyapunovReport rep;
  rep.tolerance = tolerance;
  const auto& params = model.params();
  rep.delta_hat = lyapunov_delta(alpha, q, params);
  rep.delta_consistency =
      (alpha * alpha * inertia_apply(params, q) + params.beta2 * kE3 - rep.delta_hat * q).norm();
  rep.consistent = rep.delta_consistency <= consistency_tol;
  if (times.size() != perturbations.size()) {
    throw std::invalid_argument("lyapunov_monitor: times and perturbations differ in length");
  }
  rep.functional.reserve(perturbations.size());
  for (const auto& p : perturbations) {
    rep.functional.push_back(lyapunov_functional(p, alpha, rep.delta_hat, model));
  }
  for (std::size_t i = 1; i < perturbations.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    if (dt <= 0.0) continue;
    const double mean_diss =
        0.25 * (model.dissipation_rate(perturbations[i]) + model.dissipation_rate(perturbations[i - 1]));
    const double res = 0.5 * (rep.functional[i] - rep.functional[i - 1]) / dt + mean_diss;
    rep.max_step_residual = std::max(rep.max_step_residual, std::abs(res));
  }
  rep.passed = rep.consistent && rep.max_step_residual <= tolerance;
  return rep;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t";
  for (int j = 1; j <= traj.n; ++j) out << ",c_" << j;
  out << ",omega_1,omega_2,omega_3,gamma_1,gamma_2,gamma_3,gammanorm,K,E,U,D\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    put_number(out, traj.times[i]);
    for (Eigen::Index k = 0; k < traj.states[i].size(); ++k) {
      out << ',';
      put_number(out, traj.states[i][k]);
    }
    for (double v : {traj.gamma_norm[i], traj.momentum[i], traj.kinetic[i], traj.potential[i],
                     traj.dissipated[i]}) {
      out << ',';
      put_number(out, v);
    }
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  write_trajectory_csv(out, traj);
}

}  // namespace fluidtop
