// Acceptance run: one PASS/FAIL line per criterion, each at its stated tolerance and time budget.

#include "fluidtop/equilibria.hpp"
#include "fluidtop/normal_form.hpp"
#include "fluidtop/omega_limit.hpp"
#include "fluidtop/scenario.hpp"
#include "fluidtop/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

using namespace fluidtop;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

BodyParams params(double nu) {
  BodyParams p;
  p.lambda = Vec3(1.0, 2.0, 3.0);
  p.beta2 = 1.0;
  p.rho = 0.5;
  p.nu = nu;
  return p;
}

BasisPtr basis(int n, double nu) {
  static std::map<std::pair<int, double>, BasisPtr> cache;
  auto& b = cache[{n, nu}];
  if (!b) b = std::make_shared<const GalerkinBasis>(build_ball_basis(n, 0, params(nu)));
  return b;
}

RigidFluidModel model(int n, double nu) { return RigidFluidModel(params(nu), basis(n, nu)); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Eigen::VectorXd seeded_direction(int d, std::uint64_t seed) {
  const CounterRng rng{seed};
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal(static_cast<std::uint64_t>(i));
  return v.normalized();
}

// Perturbs u by amp along dir and puts gamma back on the unit sphere.
Eigen::VectorXd perturbed(const Eigen::VectorXd& u, const Eigen::VectorXd& dir, double amp) {
  Eigen::VectorXd v = u + amp * dir;
  v.tail<3>().normalize();
  return v;
}

Outcome criterion1() {
  const auto p = params(0.5);
  const auto t0 = Clock::now();
  const auto plus = make_steady(Family::SP1, 1.0, p);
  SteadyOptions o;
  o.branch_sign = -1;
  const auto minus = make_steady(Family::SP1, 1.0, p, o);
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  double worst = 0.0;
  for (const auto& s : {plus, minus}) {
    const double sign = s.q[0] > 0.0 ? 1.0 : -1.0;
    worst = std::max(worst, (s.q - Vec3(sign * std::sqrt(3.0) / 2.0, 0.0, -0.5)).norm());
    const Vec3 lhs = s.alpha * s.alpha * s.q.cross(inertia_apply(p, s.q));
    const Vec3 rhs = p.beta2 * kE3.cross(s.q);
    worst = std::max(worst, (lhs - rhs).norm());
    worst = std::max(worst, (rhs - Vec3(0.0, sign * std::sqrt(3.0) / 2.0, 0.0)).norm());
  }
  const bool branches = plus.q[0] > 0.0 && minus.q[0] < 0.0;
  return {worst <= 1e-14 && branches && ms < 1.0,
          "residual=" + sci(worst) + " (tol 1e-14), both branches, " + sci(ms) + " ms (< 1 ms)"};
}

Outcome criterion2() {
  double worst = 0.0;
  std::string dims;
  bool ok = true;
  for (int n : {5, 8, 15}) {
    const auto m = model(n, 0.5);
    const auto s = make_steady(Family::SP1, 1.0, m);
    const auto k = kernel_residual_check(s, m);
    worst = std::max({worst, k.residual1, k.residual2});
    const auto split = spectral_split(assemble_linearization(s, m));
    dims += (dims.empty() ? "" : ",") + std::to_string(split.center_dim);
    ok = ok && split.center_dim == 2;
  }
  return {ok && worst <= 1e-9, "max |L w|/|w|=" + sci(worst) + " (tol 1e-9), center dims {" + dims + "}"};
}

Outcome criterion3() {
  bool ok = true;
  double worst_ratio = std::numeric_limits<double>::infinity();
  std::string mult;
  for (int n : {5, 8, 15}) {
    const auto m = model(n, 0.5);
    const auto l = assemble_linearization(make_steady(Family::SP1, 1.0, m), m);
    const auto split = spectral_split(l);
    const auto ss = semisimple_check(l, split.eps_c);
    const double ratio = imaginary_axis_margin(split) / split.eps_c;
    worst_ratio = std::min(worst_ratio, ratio);
    mult += (mult.empty() ? "" : " ") + std::to_string(ss.algebraic) + "/" + std::to_string(ss.geometric);
    ok = ok && ss.passed && ss.algebraic == 2 && ss.geometric == 2 && split.axis_dim == 0 && ratio >= 100.0;
  }
  return {ok, "alg/geom " + mult + ", min margin/eps_c=" + sci(worst_ratio) + " (>= 100)"};
}

struct ConservationRun {
  InvariantReport inv;
  EnergyReport energy;
  double integrated_rate = 0.0;
  double seconds = 0.0;
};

std::map<std::pair<int, double>, ConservationRun> conservation_runs() {
  std::map<std::pair<int, double>, ConservationRun> out;
  for (int n : {8, 15}) {
    const auto m = model(n, 0.5);
    const CounterRng rng{7};
    SystemState s0;
    s0.c.resize(n);
    for (int i = 0; i < n; ++i) s0.c[i] = 0.1 * (2.0 * rng.uniform(static_cast<std::uint64_t>(i)) - 1.0);
    s0.omega = Vec3(0.4, -0.3, 0.6);
    s0.gamma = Vec3(0.3, -0.2, 1.0).normalized();
    for (double tol : {1e-10, 5e-11}) {
      const auto t0 = Clock::now();
      const auto traj = integrate(m, s0, 50.0, 5000, IntegratorOptions{tol, tol});
      ConservationRun r;
      r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      r.inv = monitor_invariants(traj, 1e-8);
      r.energy = monitor_energy(traj, m, 1e-6);
      // trapezoid of the pointwise residual |d(E+U)/dt + 2 c^T S c|
      Eigen::VectorXd f(m.dim());
      double prev = 0.0;
      for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& u = traj.states[i];
        m.forcing(u, f);
        const double rate = 2.0 * u.head(n + 3).dot(f.head(n + 3)) - 2.0 * m.params().beta2 * f[n + 5];
        const double res = std::abs(rate + m.dissipation_rate(u));
        if (i > 0) r.integrated_rate += 0.5 * (res + prev) * (traj.times[i] - traj.times[i - 1]);
        prev = res;
      }
      out[{n, tol}] = r;
    }
  }
  return out;
}

Outcome criterion4(const std::map<std::pair<int, double>, ConservationRun>& runs) {
  bool ok = true;
  std::string detail;
  for (int n : {8, 15}) {
    const auto& a = runs.at({n, 1e-10});
    const auto& b = runs.at({n, 5e-11});
    const bool within = a.inv.max_gamma_drift <= 1e-8 && a.inv.max_k_drift <= 1e-8;
    const bool shrink = b.inv.max_gamma_drift < a.inv.max_gamma_drift && b.inv.max_k_drift < a.inv.max_k_drift;
    const bool fast = a.seconds < 30.0 && b.seconds < 30.0;
    ok = ok && within && shrink && fast;
    detail += "N=" + std::to_string(n) + ": |g| " + sci(a.inv.max_gamma_drift) + "->" + sci(b.inv.max_gamma_drift) +
              ", K " + sci(a.inv.max_k_drift) + "->" + sci(b.inv.max_k_drift) + ", " + sci(a.seconds) + " s; ";
  }
  return {ok, detail + "(tol 1e-8, drifts must shrink, < 30 s)"};
}

Outcome criterion5(const std::map<std::pair<int, double>, ConservationRun>& runs) {
  bool ok = true;
  std::string detail;
  for (int n : {8, 15}) {
    const auto& r = runs.at({n, 1e-10});
    const double tol = r.energy.tolerance;
    ok = ok && r.integrated_rate <= tol && r.energy.max_balance_residual <= tol && r.energy.monotone;
    detail += "N=" + std::to_string(n) + ": int rate " + sci(r.integrated_rate) + ", balance " +
              sci(r.energy.max_balance_residual) + ", rise " + sci(r.energy.max_increase) + " (tol " + sci(tol) +
              "); ";
  }
  return {ok, detail};
}

Outcome criterion6() {
  const auto m = model(8, 0.5);
  const auto s = make_steady(Family::SP1, 1.0, m);
  const Eigen::MatrixXd a = -assemble_linearization(s, m);
  const Eigen::VectorXd p0 = 1e-3 * seeded_direction(m.dim(), 7);
  const auto times = uniform_times(10.0, 1000);
  const auto sol = integrate_ode(
      [&a](Eigen::Ref<const Eigen::VectorXd> x, Eigen::Ref<Eigen::VectorXd> dx) { dx.noalias() = a * x; }, p0, times,
      IntegratorOptions{1e-13, 1e-13});
  const auto rep = lyapunov_monitor(sol.times, sol.states, s.alpha, s.q, m, 1e-7);
  const double expected = s.alpha * s.alpha * m.params().lambda[0];
  const bool ok = rep.passed && rep.consistent && std::abs(rep.delta_hat - expected) <= 1e-14 &&
                  sol.states.size() == times.size();
  return {ok, "max step residual=" + sci(rep.max_step_residual) + " (tol 1e-7), delta_hat=" + sci(rep.delta_hat) +
                  " vs alpha^2 lambda1=" + sci(expected) + ", consistency=" + sci(rep.delta_consistency)};
}

Outcome criterion7() {
  const auto m = model(8, 0.05);
  const auto sys = make_system(m);
  const IntegratorOptions tight{1e-12, 1e-12};

  // normally stable: upright permanent rotation
  const auto pr = make_steady(Family::PR, 0.5, m);
  const auto c_pr = classify(pr, m);
  const Eigen::VectorXd u0 = perturbed(pack(pr.state), seeded_direction(m.dim(), 11), 1e-3);
  const auto ta = integrate(m, unpack(u0, 8), 400.0, 4000, tight);
  const auto ca = certify_decay(ta.times, ta.states, sys);
  const bool stable_ok = c_pr.verdict == Verdict::NormallyStable && ca.converged && ca.r2 >= 0.99 &&
                         ca.ratio >= 0.8 && ca.ratio <= 1.2;

  // normally hyperbolic: tilted spin pushed along its unstable eigenvector
  const auto sp = make_steady(Family::SP1, 1.0, m);
  const auto c_sp = classify(sp, m);
  const Eigen::MatrixXd l = assemble_linearization(sp, m);
  Eigen::EigenSolver<Eigen::MatrixXd> es(l);
  Eigen::Index k = 0;
  es.eigenvalues().real().minCoeff(&k);
  const Eigen::VectorXd dir = es.eigenvectors().col(k).real().normalized();
  const Eigen::VectorXd v0 = perturbed(pack(sp.state), dir, 1e-3);
  const auto tb = integrate(m, unpack(v0, 8), 800.0, 8000, tight);
  double farthest = 0.0;
  for (const auto& u : tb.states) farthest = std::max(farthest, m.rhs(u).norm());
  const auto cb = certify_decay(tb.times, tb.states, sys);
  const bool other = cb.converged && (cb.u_inf - pack(sp.state)).norm() > 1e-2;
  const bool escaped = tb.stats.blowup;
  const bool hyper_ok = c_sp.verdict == Verdict::NormallyHyperbolic && (escaped || (other && cb.r2 >= 0.99));
  std::string limit = "none";
  if (cb.converged) {
    const auto id = identify_steady(cb.u_inf, m);
    limit = std::string(family_name(id.family)) + " alpha=" + sci(id.alpha);
  }
  return {stable_ok && hyper_ok,
          "stable: gamma_s=" + sci(ca.gamma_s) + " k/gamma_s=" + sci(ca.ratio) + " R2=" + sci(ca.r2) +
              " ([0.8,1.2], R2>=0.99); hyperbolic (Re=" + sci(es.eigenvalues()[k].real()) + "): " +
              (escaped ? "escaped" : "converged to " + limit + " R2=" + sci(cb.r2) + " k/gamma_s=" + sci(cb.ratio))};
}

Outcome criterion8() {
  bool ok = true;
  std::string rates;
  for (double c : {0.25, 0.5, 0.75}) {
    ToyOptions o;
    o.converging_y0 = c;
    o.integrator = IntegratorOptions{1e-12, 1e-12};
    const auto r = toy_example_run(o);
    const auto& cert = r.converging_certificate;
    ok = ok && r.stable_line.verdict == Verdict::NormallyStable &&
         r.hyperbolic_line.verdict == Verdict::NormallyHyperbolic && cert.converged && cert.u_inf.norm() <= 1e-9 &&
         std::abs(cert.rate - 1.0) <= 0.05 && r.escaped;
    rates += (rates.empty() ? "" : ",") + sci(cert.rate);
  }
  return {ok, "(x,0) stable, (x,1) hyperbolic, rates {" + rates + "} (1 +- 0.05)"};
}

Outcome criterion9() {
  const auto p = params(0.05);
  const auto set = predict_limit_candidates(p, 1.5);
  bool exact = false, second = false;
  double res = 0.0;
  for (const auto* c : set.of(Family::SP1)) {
    if (std::abs(c->alpha - 1.0) <= 1e-12) {
      exact = true;
      res = std::max(res, c->polynomial_residual);
    }
    if (c->alpha >= 1.2 && c->alpha <= 1.3) second = true;
  }
  std::vector<double> spins;
  for (const auto* c : set.of(Family::PR)) spins.push_back(c->spin());
  std::sort(spins.begin(), spins.end());
  const bool pr = spins.size() == 2 && std::abs(spins[0] + 0.5) <= 1e-15 && std::abs(spins[1] - 0.5) <= 1e-15;
  const bool no_sp2 = set.of(Family::SP2).empty();
  const bool predicted = exact && res <= 1e-12 && second && pr && no_sp2;

  const auto cfg = load_config(std::filesystem::path(FLUIDTOP_CONFIG_DIR) / "dissipative_k15.yaml");
  const auto dir = std::filesystem::temp_directory_path() / "fluidtop_acceptance";
  const auto run = run_scenario(cfg, dir);
  const auto& rep = run.report;
  const bool matched = run.status == 0 && rep["match"]["matched"].get<bool>();
  const double distance = matched ? rep["match"]["distance"].get<double>() : -1.0;
  const double k_drift = run.status == 0 ? rep["invariants"]["max_k_drift"].get<double>() : 1.0;
  const double k0 = run.status == 0 ? rep["invariants"]["k0"].get<double>() : 0.0;
  const bool ok = predicted && matched && distance <= 1e-4 && k_drift <= 1e-8 && std::abs(k0 - 1.5) <= 1e-12;
  std::filesystem::remove_all(dir);
  return {ok, std::string("SP1 root 1 residual=") + sci(res) + (second ? ", second root in [1.2,1.3]" : ", no second root") +
                  (pr ? ", PR +-0.5" : ", PR spins wrong") + (no_sp2 ? ", no SP2" : ", SP2 present") +
                  "; run: " + (run.status == 0 ? "distance=" + sci(distance) + " (tol 1e-4), K drift=" + sci(k_drift)
                                                : "failed at " + run.failed_stage + ": " + run.error)};
}

Outcome criterion10() {
  const auto cfg = load_config(std::filesystem::path(FLUIDTOP_CONFIG_DIR) / "pr_boundary_sweep.yaml");
  const auto table = run_sweep(cfg, 4);
  const auto col = [&](const char* name) {
    return static_cast<std::size_t>(std::find(table.header.begin(), table.header.end(), name) - table.header.begin());
  };
  std::string below, above;
  for (const auto& row : table.rows) {
    const double off = std::stod(row[col("condition_offset")]);
    if (off <= -1e-2) below = row[col("verdict")];
    if (off >= 1e-2) above = row[col("verdict")];
  }
  const bool flips = !below.empty() && !above.empty() && below != above && below != "Degenerate" &&
                     above != "Degenerate";

  // Locate both band edges by bisection on the condition offset.
  const auto m = model(cfg.basis_n, cfg.body.nu);
  const auto degenerate = [&](double off) {
    SteadyOptions o;
    o.branch_sign = cfg.sweep.branch;
    const double alpha = std::sqrt((1.0 + off) * cfg.body.beta2 / (cfg.body.lambda[2] - cfg.body.lambda[1]));
    return classify(make_steady(Family::PR, alpha, m, o), m).verdict == Verdict::Degenerate;
  };
  const auto edge = [&](double inside, double outside) {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (inside + outside);
      (degenerate(mid) ? inside : outside) = mid;
    }
    return outside;
  };
  const bool centre = degenerate(0.0);
  const double hi = edge(0.0, 1e-3);
  const double lo = edge(0.0, -1e-3);
  const double width = hi - lo;
  return {flips && centre && width <= 2.0 * kGenericityMargin,
          below + " -> " + above + ", Degenerate band [" + sci(lo) + ", " + sci(hi) + "] width=" + sci(width) +
              " (<= " + sci(2.0 * kGenericityMargin) + ")"};
}

Outcome criterion11() {
  double fd = 0.0, proj = 0.0, skew = 0.0;
  int points = 0;
  for (int n : {5, 8, 15}) {
    const auto m = model(n, 0.5);
    skew = std::max({skew, m.basis().diagnostics.coriolis_skew, m.basis().diagnostics.convection_skew});
    const auto sys = make_system(m);
    for (Family f : {Family::PR, Family::SP1, Family::SP2}) {
      for (double alpha : {0.5, 1.0, 1.23375, 1.5}) {
        for (int branch : {1, -1}) {
          SteadyOptions o;
          o.branch_sign = branch;
          std::optional<SteadyState> s;
          try {
            s = make_steady(f, alpha, m, o);
          } catch (const std::domain_error&) {
            continue;
          }
          ++points;
          fd = std::max(fd, jacobian_fd_mismatch(sys, pack(s->state)));
          const auto l = assemble_linearization(*s, m);
          proj = std::max(proj, projector_algebra(spectral_split(l), l).worst());
        }
      }
    }
  }
  skew = std::max(skew, basis(50, 0.5)->diagnostics.coriolis_skew);
  skew = std::max(skew, basis(50, 0.5)->diagnostics.convection_skew);

  const auto cfg = load_config(std::filesystem::path(FLUIDTOP_CONFIG_DIR) / "pr_boundary_sweep.yaml");
  const bool same = run_sweep(cfg, 1).to_csv() == run_sweep(cfg, 8).to_csv();
  return {fd <= 1e-6 && proj <= 1e-8 && skew <= 1e-10 && same,
          std::to_string(points) + " equilibria: FD " + sci(fd) + " (1e-6), projectors " + sci(proj) +
              " (1e-8), skew " + sci(skew) + " (1e-10), sweep 1 vs 8 workers " + (same ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&failed](int id, const char* name, double budget, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = s <= budget;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %-28s %s [%.2f s, budget %.0f s]\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), s,
                budget);
    std::fflush(stdout);
  };

  report(1, "steady-family formulas", 1.0, criterion1);
  report(2, "kernel of L_h", 1.0, criterion2);
  report(3, "semisimple zero, axis gap", 1.0, criterion3);
  std::map<std::pair<int, double>, ConservationRun> runs;
  report(4, "conservation", 120.0, [&] {
    runs = conservation_runs();
    return criterion4(runs);
  });
  report(5, "energy identity", 1.0, [&] { return criterion5(runs); });
  report(6, "Lyapunov functional", 10.0, criterion6);
  report(7, "classification+convergence", 240.0, criterion7);
  report(8, "toy example", 1.0, criterion8);
  report(9, "omega-limit prediction", 300.0, criterion9);
  report(10, "degeneracy boundaries", 120.0, criterion10);
  report(11, "numerical hygiene", 600.0, criterion11);
  std::printf("%s: %d of 11 criteria failed\n", failed == 0 ? "ALL PASS" : "FAILURES", failed);
  return failed == 0 ? 0 : 1;
}
