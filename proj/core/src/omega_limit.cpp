#include "fluidtop/omega_limit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fluidtop {

double conserved_K(const SystemState& s0, const RigidFluidModel& model) { return model.momentum(pack(s0)); }

double polynomial_value(const std::vector<double>& coeffs, double x) {
  double v = 0.0;
  for (double c : coeffs) v = v * x + c;
  return v;
}

std::vector<double> real_polynomial_roots(const std::vector<double>& coeffs, double imag_tol) {
  std::size_t lead = 0;
  while (lead < coeffs.size() && coeffs[lead] == 0.0) ++lead;
  const std::vector<double> c(coeffs.begin() + static_cast<std::ptrdiff_t>(lead), coeffs.end());
  if (c.size() < 2) return {};
  const auto deg = static_cast<Eigen::Index>(c.size() - 1);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (Eigen::Index k = 0; k < deg; ++k) comp(0, k) = -c[static_cast<std::size_t>(k + 1)] / c[0];
  for (Eigen::Index k = 1; k < deg; ++k) comp(k, k - 1) = 1.0;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();

  std::vector<double> deriv;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) deriv.push_back(c[k] * static_cast<double>(c.size() - 1 - k));

  std::vector<double> roots;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].imag()) > imag_tol * (1.0 + std::abs(ev[i]))) continue;
    double x = ev[i].real();
    for (int it = 0; it < 3; ++it) {
      const double dp = polynomial_value(deriv, x);
      if (dp == 0.0) break;
      const double step = polynomial_value(c, x) / dp;
      if (!std::isfinite(step)) break;
      x -= step;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<double> limit_quartic(Family family, const BodyParams& params, double k) {
  const auto& l = params.lambda;
  const double li = family == Family::SP2 ? l[1] : l[0];
  const double gap = l[2] - li;
  return {gap * li, -gap * k, 0.0, 0.0, params.beta2 * params.beta2};
}

std::vector<const LimitCandidate*> LimitCandidateSet::of(Family f) const {
  std::vector<const LimitCandidate*> out;
  for (const auto& c : candidates) {
    if (c.family == f) out.push_back(&c);
  }
  return out;
}

LimitCandidateSet predict_limit_candidates(const BodyParams& params, double k, const RigidFluidModel* model) {
  LimitCandidateSet set;
  set.k = k;
  set.data = data_condition_flags(k, params);
  const auto& l = params.lambda;
  const bool e12 = moments_equal(l[0], l[1]);
  const bool e23 = moments_equal(l[1], l[2]);
  const bool e13 = moments_equal(l[0], l[2]);
  std::vector<Family> sp;
  if (e12 && e23) {
    set.pattern_case = 1;
  } else if (e12) {
    set.pattern_case = 0;
  } else if (e23) {
    set.pattern_case = 2;
    sp = {Family::SP1};
  } else if (e13) {
    set.pattern_case = 3;
    sp = {Family::SP2};
  } else {
    set.pattern_case = 4;
    sp = {Family::SP1, Family::SP2};
  }

  auto finish = [&](LimitCandidate c) {
    c.identity_residual = steady_identity_residual(c.alpha, c.q, params);
    c.momentum_residual = std::abs(c.alpha * c.q.dot(inertia_apply(params, c.q)) - k);
    if (model != nullptr && c.feasible) {
      SteadyState s;
      s.family = c.family;
      s.alpha = c.alpha;
      s.q = c.q;
      s.state.c = Eigen::VectorXd::Zero(model->basis_size());
      s.state.omega = c.alpha * c.q;
      s.state.gamma = c.q;
      s.residual = model->rhs(pack(s.state)).norm();
      if (s.residual <= 1e-10) c.verdict = classify(s, *model).verdict;
    }
    set.candidates.push_back(c);
  };

  // gamma = q = +-e3 and omega = alpha q give K = alpha lambda3 on both axis orientations.
  for (double sign : {1.0, -1.0}) {
    LimitCandidate c;
    c.family = Family::PR;
    c.alpha = k / l[2];
    c.q = Vec3{0.0, 0.0, sign};
    finish(c);
  }

  for (Family f : sp) {
    const auto poly = limit_quartic(f, params, k);
    double scale = 0.0;
    for (double v : poly) scale = std::max(scale, std::abs(v));
    for (double alpha : real_polynomial_roots(poly)) {
      if (alpha == 0.0) continue;
      const double q3 = sp_axis_height(f, alpha, params);
      const bool feasible = std::abs(q3) <= 1.0;
      const double r = feasible ? std::sqrt(std::max(0.0, 1.0 - q3 * q3)) : 0.0;
      for (double sign : {1.0, -1.0}) {
        LimitCandidate c;
        c.family = f;
        c.alpha = alpha;
        c.feasible = feasible;
        c.q = f == Family::SP1 ? Vec3{sign * r, 0.0, q3} : Vec3{0.0, sign * r, q3};
        c.polynomial_residual = std::abs(polynomial_value(poly, alpha)) / scale;
        finish(c);
        if (!feasible) break;
      }
    }
  }
  return set;
}

MatchReport match_terminal(const Trajectory& traj, const LimitCandidateSet& candidates,
                           const RigidFluidModel& model, double tol_match, const DecayWindow& window) {
  MatchReport rep;
  rep.tolerance = tol_match;
  if (traj.size() == 0) {
    rep.message = "empty trajectory";
    return rep;
  }
  const Eigen::VectorXd& last = traj.states.back();
  rep.terminal_rhs = model.rhs(last).norm();
  rep.terminal_k = traj.momentum.back();
  rep.settled = rep.terminal_rhs <= window.terminal_rhs_tol;
  if (!rep.settled) {
    rep.message = "trajectory has not settled; no candidate matched";
    return rep;
  }
  const NewtonResult nr = newton_refine(unpack(last, model.basis_size()), model);
  if (!nr.converged) {
    rep.message = "terminal refinement failed: " + nr.message;
    return rep;
  }
  rep.refined = true;
  rep.limit = nr.steady;
  rep.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.candidates.size(); ++i) {
    const auto& c = candidates.candidates[i];
    if (!c.feasible) continue;
    const double d = std::sqrt((c.alpha - rep.limit.alpha) * (c.alpha - rep.limit.alpha) + (c.q - rep.limit.q).squaredNorm());
    if (d < rep.distance) {
      rep.distance = d;
      rep.candidate = static_cast<int>(i);
    }
  }
  rep.matched = rep.candidate >= 0 && rep.distance <= tol_match;
  rep.message = rep.matched ? "terminal state matches a predicted candidate" : "no candidate within tolerance";
  rep.certificate = certify_decay(traj.times, traj.states, make_system(model), window);
  return rep;
}

}  // namespace fluidtop
