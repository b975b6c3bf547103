// fluidtop: command line front end for the rigid body with a fluid-filled cavity.

#include "fluidtop/normal_form.hpp"
#include "fluidtop/omega_limit.hpp"
#include "fluidtop/report.hpp"
#include "fluidtop/scenario.hpp"
#include "fluidtop/spectral.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace fluidtop;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_abs;
  std::optional<double> tol_rel;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
};

ScenarioConfig load(const Common& o) {
  ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.tol_abs) cfg.integrator.abs_tol = *o.tol_abs;
  if (o.tol_rel) cfg.integrator.rel_tol = *o.tol_rel;
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  return cfg;
}

void emit(const Common& o, const std::string& stem, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(o.out);
  const auto file = fs::path(o.out) / stem;
  std::ofstream(file) << text;
  std::cerr << "wrote " << file.string() << '\n';
}

RigidFluidModel model_for(const ScenarioConfig& cfg) {
  const auto v = validate_hypotheses(cfg.body);
  if (!v.passed()) {
    for (const auto& c : v.checks) {
      if (c.fatal && !c.passed) std::cerr << "hypothesis " << c.name << " failed: " << c.detail << '\n';
    }
    throw std::runtime_error("body parameters violate the standing hypotheses");
  }
  return RigidFluidModel(cfg.body, scenario_basis(cfg));
}

int cmd_simulate(const Common& o) {
  const auto cfg = load(o);
  const auto result = run_scenario(cfg, o.out.empty() ? fs::path("out") : fs::path(o.out));
  for (const auto& a : result.artifacts) std::cerr << "wrote " << a.string() << '\n';
  if (result.status != 0) {
    std::cerr << "stage " << result.failed_stage << " failed: " << result.error << '\n';
  }
  return result.status;
}

int cmd_equilibria(const Common& o, bool with_classes) {
  const auto cfg = load(o);
  const auto model = model_for(cfg);
  json j{{"params", to_record(cfg.body)}, {"catalog", equilibria_catalog(cfg, model, with_classes)}};
  if (with_classes) {
    if (const auto s = scenario_steady(cfg, model)) {
      j["base"] = {{"steady", to_record(*s, cfg.body)}, {"classification", to_record(classify(*s, model))}};
    }
  }
  emit(o, cfg.name + (with_classes ? "_classify.json" : "_equilibria.json"), j.dump(2) + "\n");
  return 0;
}

int cmd_predict(const Common& o, std::optional<double> k_override) {
  const auto cfg = load(o);
  const auto model = model_for(cfg);
  const double k = k_override ? *k_override : conserved_K(initial_state(cfg, model), model);
  const auto set = predict_limit_candidates(cfg.body, k, &model);
  emit(o, cfg.name + "_prediction.json", to_record(set).dump(2) + "\n");
  return 0;
}

int cmd_sweep(const Common& o) {
  const auto cfg = load(o);
  const auto table = run_sweep(cfg, o.workers);
  emit(o, cfg.name + "_sweep.csv", table.to_csv());
  return 0;
}

// Runs the structural and conservation checks on the configured body.
int cmd_verify(const Common& o) {
  const auto cfg = load(o);
  const auto model = model_for(cfg);
  int failures = 0;
  const auto line = [&failures](const std::string& name, bool ok, double value, double tol) {
    std::printf("%s %-28s %.3e (tol %.1e)\n", ok ? "PASS" : "FAIL", name.c_str(), value, tol);
    if (!ok) ++failures;
  };

  const auto& d = model.basis().diagnostics;
  line("basis.mass_symmetry", d.mass_asymmetry <= 1e-10, d.mass_asymmetry, 1e-10);
  line("basis.coriolis_skew", d.coriolis_skew <= 1e-10, d.coriolis_skew, 1e-10);
  line("basis.convection_skew", d.convection_skew <= 1e-10, d.convection_skew, 1e-10);

  const auto sys = make_system(model);
  for (Family f : enumerate_families(cfg.body)) {
    for (double alpha : cfg.catalog_alphas) {
      std::optional<SteadyState> s;
      try {
        s = make_steady(f, alpha, model);
      } catch (const std::exception&) {
        continue;
      }
      char tag_buf[48];
      std::snprintf(tag_buf, sizeof tag_buf, "%s(%g)", std::string(family_name(f)).c_str(), alpha);
      const std::string tag = tag_buf;
      const Eigen::VectorXd u = pack(s->state);
      line(tag + ".identity", s->residual <= 1e-12, s->residual, 1e-12);
      const double fd = jacobian_fd_mismatch(sys, u);
      line(tag + ".jacobian_fd", fd <= 1e-6, fd, 1e-6);
      const Eigen::MatrixXd l = assemble_linearization(*s, model);
      const double pa = projector_algebra(spectral_split(l), l).worst();
      line(tag + ".projectors", pa <= 1e-8, pa, 1e-8);
    }
  }

  const auto s0 = initial_state(cfg, model);
  const auto traj = integrate(model, s0, std::min(cfg.t_end, 50.0), std::max<std::size_t>(cfg.samples, 2000),
                              cfg.integrator);
  const auto inv = monitor_invariants(traj, 1e-8);
  line("conservation.gamma", inv.max_gamma_drift <= 1e-8, inv.max_gamma_drift, 1e-8);
  line("conservation.K", inv.max_k_drift <= 1e-8, inv.max_k_drift, 1e-8);
  const auto en = monitor_energy(traj, model);
  line("energy.rate", en.max_rate_residual <= en.tolerance, en.max_rate_residual, en.tolerance);
  line("energy.monotone", en.monotone, en.max_increase, en.tolerance);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamics, equilibria and long-time behaviour of a heavy body with a fluid-filled cavity"};
  app.require_subcommand(1);

  Common o;
  std::optional<double> k_override;
  const auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario file (YAML)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed for random initial data");
    sub->add_option("--workers", o.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--tol-abs", o.tol_abs, "integrator absolute tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--tol-rel", o.tol_rel, "integrator relative tolerance")->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "run the full scenario pipeline");
  auto* equilibria = app.add_subcommand("equilibria", "list steady families");
  auto* classify_cmd = app.add_subcommand("classify", "list and classify steady states");
  auto* predict = app.add_subcommand("predict", "omega-limit candidates for the initial data");
  auto* sweep = app.add_subcommand("sweep", "classification over a parameter grid");
  auto* verify = app.add_subcommand("verify", "structural and conservation checks");
  for (auto* sub : {simulate, equilibria, classify_cmd, predict, sweep, verify}) common(sub);
  predict->add_option("--momentum", k_override, "use this K instead of the initial data");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(o);
    if (equilibria->parsed()) return cmd_equilibria(o, false);
    if (classify_cmd->parsed()) return cmd_equilibria(o, true);
    if (predict->parsed()) return cmd_predict(o, k_override);
    if (sweep->parsed()) return cmd_sweep(o);
    if (verify->parsed()) return cmd_verify(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
