#include "fluidtop/report.hpp"

#include <cmath>

namespace fluidtop {

using nlohmann::json;

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

}  // namespace

json to_record(const Vec3& v) { return json::array({number(v[0]), number(v[1]), number(v[2])}); }

json to_record(const BodyParams& p) {
  return {{"lambda", to_record(p.lambda)}, {"beta2", p.beta2}, {"rho", p.rho}, {"nu", p.nu}, {"mu", p.mu()}};
}

json to_record(const ValidationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"fatal", c.fatal}, {"detail", c.detail}});
  }
  return {{"passed", r.passed()}, {"checks", checks}};
}

json to_record(const GalerkinBasis& b) {
  return {{"n", b.size()},
          {"field_degree", b.field_degree},
          {"quad_degree", b.quad_degree},
          {"nodes", b.node_count},
          {"mass_asymmetry", number(b.diagnostics.mass_asymmetry)},
          {"coriolis_skew", number(b.diagnostics.coriolis_skew)},
          {"convection_skew", number(b.diagnostics.convection_skew)},
          {"mass_min_eigenvalue", number(b.diagnostics.mass_min_eigenvalue)}};
}

json to_record(const IntegrationStats& s) {
  return {{"steps", s.steps}, {"rhs_evals", s.rhs_evals}, {"blowup", s.blowup},
          {"blowup_time", number(s.blowup_time)}, {"message", s.message}};
}

json to_record(const InvariantReport& r) {
  return {{"k0", number(r.k0)}, {"max_gamma_drift", number(r.max_gamma_drift)},
          {"max_k_drift", number(r.max_k_drift)}, {"threshold", r.threshold}, {"passed", r.passed}};
}

json to_record(const EnergyReport& r) {
  return {{"initial_total", number(r.initial_total)},
          {"max_split_mismatch", number(r.max_split_mismatch)},
          {"max_rate_residual", number(r.max_rate_residual)},
          {"max_balance_residual", number(r.max_balance_residual)},
          {"max_pair_residual", number(r.max_pair_residual)},
          {"max_increase", number(r.max_increase)},
          {"tolerance", number(r.tolerance)},
          {"balance_ok", r.balance_ok},
          {"monotone", r.monotone}};
}

json to_record(const LyapunovReport& r) {
  return {{"delta_hat", number(r.delta_hat)},
          {"delta_consistency", number(r.delta_consistency)},
          {"consistent", r.consistent},
          {"max_step_residual", number(r.max_step_residual)},
          {"tolerance", r.tolerance},
          {"initial", r.functional.empty() ? json(nullptr) : number(r.functional.front())},
          {"final", r.functional.empty() ? json(nullptr) : number(r.functional.back())},
          {"passed", r.passed}};
}

json to_record(const Condition& c) {
  return {{"name", c.name}, {"value", number(c.value)}, {"target", number(c.target)}, {"passed", c.passed}};
}

json to_record(const GenericityFlags& g) {
  json conds = json::array();
  for (const auto& c : g.conditions) conds.push_back(to_record(c));
  return {{"margin", g.margin}, {"passed", g.passed()}, {"conditions", conds}};
}

json to_record(const DataConditionFlags& d) {
  json conds = json::array();
  for (const auto& c : d.conditions) conds.push_back(to_record(c));
  return {{"k", number(d.k)}, {"zero_spin", d.zero_spin}, {"unit_gamma", d.unit_gamma},
          {"passed", d.passed()}, {"conditions", conds}};
}

json to_record(const SteadyState& s, const BodyParams& params) {
  return {{"family", std::string(family_name(s.family))},
          {"alpha", number(s.alpha)},
          {"q", to_record(s.q)},
          {"residual", number(s.residual)},
          {"identity_residual", number(steady_identity_residual(s, params))},
          {"genericity", to_record(genericity_flags(s, params))}};
}

json to_record(const SpectralSplit& s) {
  json ev = json::array();
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    static constexpr const char* names[] = {"kernel", "axis", "stable", "unstable"};
    ev.push_back({{"re", number(s.eigenvalues[i].real())},
                  {"im", number(s.eigenvalues[i].imag())},
                  {"cluster", names[static_cast<int>(s.clusters[static_cast<std::size_t>(i)])]}});
  }
  return {{"eps_c", s.eps_c},
          {"center_dim", s.center_dim},
          {"axis_dim", s.axis_dim},
          {"stable_dim", s.stable_dim},
          {"unstable_dim", s.unstable_dim},
          {"gamma_s", number(s.gamma_s)},
          {"omega_u", number(s.omega_u)},
          {"straddle", s.straddle},
          {"eigenvector_mismatch", number(s.eigenvector_mismatch)},
          {"warnings", s.warnings},
          {"eigenvalues", ev}};
}

json to_record(const SemisimpleResult& s) {
  return {{"algebraic", s.algebraic}, {"geometric", s.geometric}, {"transversality", number(s.transversality)},
          {"ill_conditioned", s.ill_conditioned}, {"passed", s.passed}};
}

json to_record(const Classification& c) {
  return {{"verdict", std::string(verdict_name(c.verdict))},
          {"kernel_dim", c.kernel_dim},
          {"tangent_dim", c.tangent_dim},
          {"tangent_residual", number(c.tangent_residual)},
          {"semisimple", to_record(c.semisimple)},
          {"imaginary_axis_margin", number(c.axis_margin)},
          {"unstable_count", c.unstable_count},
          {"genericity_passed", c.genericity_passed},
          {"reasons", c.reasons},
          {"spectrum", to_record(c.split)}};
}

json to_record(const KernelResidual& k) {
  return {{"w1", vec(k.w1)}, {"w2", vec(k.w2)}, {"residual1", number(k.residual1)}, {"residual2", number(k.residual2)}};
}

json to_record(const DecayCertificate& c) {
  return {{"converged", c.converged},
          {"clean", c.clean},
          {"message", c.message},
          {"rate", number(c.rate)},
          {"r2", number(c.r2)},
          {"gamma_s", number(c.gamma_s)},
          {"ratio", number(c.ratio)},
          {"initial_distance", number(c.initial_distance)},
          {"window", {{"start", number(c.window_start)}, {"end", number(c.window_end)}, {"samples", c.window_samples}}},
          {"u_inf", vec(c.u_inf)}};
}

json to_record(const Flattening& f) {
  return {{"base", vec(f.base)},
          {"center_dim", f.center_basis.cols()},
          {"fit_residual", number(f.fit_residual)},
          {"rms_residual", number(f.rms_residual)},
          {"derivative_norm", number(f.derivative_norm)},
          {"validity_radius", number(f.validity_radius)},
          {"equation_residual", number(f.equation_residual)}};
}

json to_record(const LimitCandidate& c) {
  return {{"family", std::string(family_name(c.family))},
          {"alpha", number(c.alpha)},
          {"q", to_record(c.q)},
          {"spin", number(c.spin())},
          {"feasible", c.feasible},
          {"polynomial_residual", number(c.polynomial_residual)},
          {"identity_residual", number(c.identity_residual)},
          {"momentum_residual", number(c.momentum_residual)},
          {"verdict", c.verdict ? json(std::string(verdict_name(*c.verdict))) : json(nullptr)}};
}

json to_record(const LimitCandidateSet& s) {
  json cands = json::array();
  for (const auto& c : s.candidates) cands.push_back(to_record(c));
  return {{"k", number(s.k)}, {"case", s.pattern_case}, {"data_conditions", to_record(s.data)}, {"candidates", cands}};
}

json to_record(const MatchReport& m) {
  return {{"settled", m.settled},
          {"refined", m.refined},
          {"matched", m.matched},
          {"terminal_rhs", number(m.terminal_rhs)},
          {"terminal_k", number(m.terminal_k)},
          {"limit", {{"family", std::string(family_name(m.limit.family))}, {"alpha", number(m.limit.alpha)}, {"q", to_record(m.limit.q)}}},
          {"candidate", m.candidate},
          {"distance", number(m.distance)},
          {"tolerance", m.tolerance},
          {"message", m.message},
          {"certificate", to_record(m.certificate)}};
}

json to_record(const ToyReport& t) {
  return {{"stable_line", {{"verdict", std::string(verdict_name(t.stable_line.verdict))}, {"kernel_dim", t.stable_line.kernel_dim}}},
          {"hyperbolic_line", {{"verdict", std::string(verdict_name(t.hyperbolic_line.verdict))}, {"kernel_dim", t.hyperbolic_line.kernel_dim}, {"unstable_count", t.hyperbolic_line.unstable_count}}},
          {"converging", {{"terminal", vec(t.converging_terminal)}, {"certificate", to_record(t.converging_certificate)}}},
          {"escaping", {{"blowup", t.blowup}, {"blowup_time", number(t.blowup_time)}, {"predicted_blowup_time", number(t.predicted_blowup_time)},
                        {"max_distance_from_equilibria", number(t.max_distance_from_equilibria)}, {"rho", t.rho}, {"escaped", t.escaped}}},
          {"fixed", {{"terminal", vec(t.fixed_terminal)}}},
          {"flattening", to_record(t.flattening)}};
}

}  // namespace fluidtop
