#include "fluidtop/scenario.hpp"

#include "fluidtop/normal_form.hpp"
#include "fluidtop/omega_limit.hpp"
#include "fluidtop/report.hpp"
#include "fluidtop/spectral.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

namespace fluidtop {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

namespace {

std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(join(path, key), "unknown key");
    }
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "malformed value");
  }
}

template <class T>
void read(const YAML::Node& parent, const std::string& path, const char* key, T& out) {
  if (const auto n = parent[key]) out = scalar<T>(n, join(path, key));
}

std::vector<double> read_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError(field, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(scalar<double>(node[i], field));
  return out;
}

Vec3 read_vec3(const YAML::Node& node, const std::string& field) {
  const auto v = read_list(node, field);
  if (v.size() != 3) throw ConfigError(field, "expected three numbers");
  return {v[0], v[1], v[2]};
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

Family read_family(const YAML::Node& node, const std::string& field) {
  const auto f = parse_family(scalar<std::string>(node, field));
  if (!f) throw ConfigError(field, "unknown family (PR, SP, SP1, SP2)");
  return *f;
}

int read_branch(const YAML::Node& node, const std::string& field) {
  const int b = scalar<int>(node, field);
  require(b == 1 || b == -1, field, "must be 1 or -1");
  return b;
}

void parse_body(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "body", {"lambda", "beta2", "rho", "nu"});
  if (node["lambda"]) cfg.body.lambda = read_vec3(node["lambda"], "body.lambda");
  read(node, "body", "beta2", cfg.body.beta2);
  read(node, "body", "rho", cfg.body.rho);
  read(node, "body", "nu", cfg.body.nu);
  for (int i = 0; i < 3; ++i) require(cfg.body.lambda[i] > 0.0, "body.lambda", "moments must be positive");
  require(cfg.body.beta2 > 0.0, "body.beta2", "must be positive");
  require(cfg.body.rho > 0.0, "body.rho", "must be positive");
  require(cfg.body.nu > 0.0, "body.nu", "must be positive");
}

void parse_basis(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "basis", {"n", "quad_degree", "cache"});
  read(node, "basis", "n", cfg.basis_n);
  read(node, "basis", "quad_degree", cfg.quad_degree);
  read(node, "basis", "cache", cfg.cache_dir);
  require(cfg.basis_n >= 0 && cfg.basis_n <= max_basis_size(), "basis.n",
          "must lie in [0, " + std::to_string(max_basis_size()) + "]");
  require(cfg.quad_degree >= 0, "basis.quad_degree", "must be nonnegative");
}

void parse_initial(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "initial", {"steady", "perturbation", "c0", "omega0", "gamma0", "momentum"});
  if (const auto s = node["steady"]) {
    check_keys(s, "initial.steady", {"family", "alpha", "branch"});
    SteadySpec spec;
    if (s["family"]) spec.family = read_family(s["family"], "initial.steady.family");
    read(s, "initial.steady", "alpha", spec.alpha);
    if (s["branch"]) spec.branch = read_branch(s["branch"], "initial.steady.branch");
    cfg.steady = spec;
  }
  if (const auto p = node["perturbation"]) {
    check_keys(p, "initial.perturbation", {"amplitude", "mode"});
    read(p, "initial.perturbation", "amplitude", cfg.perturbation);
    read(p, "initial.perturbation", "mode", cfg.perturbation_mode);
    require(cfg.perturbation >= 0.0, "initial.perturbation.amplitude", "must be nonnegative");
    require(cfg.perturbation_mode == "random" || cfg.perturbation_mode == "unstable",
            "initial.perturbation.mode", "must be random or unstable");
  }
  if (const auto c = node["c0"]) {
    if (c.IsScalar()) {
      require(scalar<std::string>(c, "initial.c0") == "zero", "initial.c0", "expected zero or a mapping");
      cfg.c0_amplitude = 0.0;
    } else {
      check_keys(c, "initial.c0", {"amplitude"});
      read(c, "initial.c0", "amplitude", cfg.c0_amplitude);
      require(cfg.c0_amplitude >= 0.0, "initial.c0.amplitude", "must be nonnegative");
    }
  }
  if (node["omega0"]) cfg.omega0 = read_vec3(node["omega0"], "initial.omega0");
  if (node["gamma0"]) cfg.gamma0 = read_vec3(node["gamma0"], "initial.gamma0");
  if (node["momentum"]) cfg.momentum = scalar<double>(node["momentum"], "initial.momentum");

  const double g = cfg.gamma0.norm();
  require(g > 0.0 && std::isfinite(g), "initial.gamma0", "must be a nonzero vector");
  if (std::abs(g - 1.0) > 1e-9) {
    cfg.warnings.push_back("initial.gamma0 renormalized from length " + fmt(g));
  }
  cfg.gamma0 /= g;
}

void parse_run(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "run", {"t_end", "samples", "abs_tol", "rel_tol", "initial_step", "max_step"});
  read(node, "run", "t_end", cfg.t_end);
  read(node, "run", "samples", cfg.samples);
  read(node, "run", "abs_tol", cfg.integrator.abs_tol);
  read(node, "run", "rel_tol", cfg.integrator.rel_tol);
  read(node, "run", "initial_step", cfg.integrator.initial_step);
  read(node, "run", "max_step", cfg.integrator.max_step);
  require(cfg.t_end > 0.0, "run.t_end", "must be positive");
  require(cfg.samples >= 1, "run.samples", "must be at least 1");
  require(cfg.integrator.abs_tol > 0.0, "run.abs_tol", "must be positive");
  require(cfg.integrator.rel_tol > 0.0, "run.rel_tol", "must be positive");
}

void parse_analysis(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "analysis",
             {"classify", "normal_form", "omega_limit", "lyapunov", "lyapunov_t_end", "lyapunov_samples",
              "flattening_radius", "flattening_count", "match_tol", "catalog_alphas"});
  read(node, "analysis", "classify", cfg.classify);
  read(node, "analysis", "normal_form", cfg.normal_form);
  read(node, "analysis", "omega_limit", cfg.omega_limit);
  read(node, "analysis", "lyapunov", cfg.lyapunov);
  read(node, "analysis", "lyapunov_t_end", cfg.lyapunov_t_end);
  read(node, "analysis", "lyapunov_samples", cfg.lyapunov_samples);
  read(node, "analysis", "flattening_radius", cfg.flattening_radius);
  read(node, "analysis", "flattening_count", cfg.flattening_count);
  read(node, "analysis", "match_tol", cfg.tol_match);
  if (node["catalog_alphas"]) cfg.catalog_alphas = read_list(node["catalog_alphas"], "analysis.catalog_alphas");
  require(cfg.lyapunov_t_end > 0.0, "analysis.lyapunov_t_end", "must be positive");
  require(cfg.lyapunov_samples >= 1, "analysis.lyapunov_samples", "must be at least 1");
  require(cfg.flattening_radius > 0.0, "analysis.flattening_radius", "must be positive");
  require(cfg.flattening_count >= 3, "analysis.flattening_count", "must be at least 3");
  require(cfg.tol_match > 0.0, "analysis.match_tol", "must be positive");
}

void parse_sweep(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "sweep",
             {"alpha", "condition_offsets", "condition_index", "beta2", "nu", "lambda1", "lambda2", "lambda3",
              "family", "branch"});
  auto& s = cfg.sweep;
  const auto list = [&](const char* key, std::vector<double>& out) {
    if (node[key]) out = read_list(node[key], join("sweep", key));
  };
  list("alpha", s.alpha);
  list("condition_offsets", s.condition_offsets);
  list("beta2", s.beta2);
  list("nu", s.nu);
  list("lambda1", s.lambda1);
  list("lambda2", s.lambda2);
  list("lambda3", s.lambda3);
  read(node, "sweep", "condition_index", s.condition_index);
  if (node["family"]) s.family = read_family(node["family"], "sweep.family");
  if (node["branch"]) s.branch = read_branch(node["branch"], "sweep.branch");
  require(s.alpha.empty() || s.condition_offsets.empty(), "sweep.condition_offsets",
          "cannot be combined with sweep.alpha");
  require(s.condition_index == 1 || s.condition_index == 2, "sweep.condition_index", "must be 1 or 2");
  for (double v : s.beta2) require(v > 0.0, "sweep.beta2", "values must be positive");
  for (double v : s.nu) require(v > 0.0, "sweep.nu", "values must be positive");
  for (const auto* axis : {&s.lambda1, &s.lambda2, &s.lambda3}) {
    for (double v : *axis) require(v > 0.0, "sweep.lambda", "values must be positive");
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<root>", std::string("unparseable: ") + e.what());
  }
  ScenarioConfig cfg;
  if (root.IsNull()) return cfg;
  check_keys(root, "", {"name", "kind", "seed", "body", "basis", "initial", "run", "analysis", "sweep"});
  read(root, "", "name", cfg.name);
  read(root, "", "kind", cfg.kind);
  read(root, "", "seed", cfg.seed);
  require(!cfg.name.empty() && cfg.name.find('/') == std::string::npos, "name", "must be a plain file stem");
  require(cfg.kind == "rigid_fluid" || cfg.kind == "toy", "kind", "must be rigid_fluid or toy");
  if (root["body"]) parse_body(root["body"], cfg);
  if (root["basis"]) parse_basis(root["basis"], cfg);
  if (root["initial"]) parse_initial(root["initial"], cfg);
  if (root["run"]) parse_run(root["run"], cfg);
  if (root["analysis"]) parse_analysis(root["analysis"], cfg);
  if (root["sweep"]) parse_sweep(root["sweep"], cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("<file>", "cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// splitmix64 applied to seed + counter * golden increment.
std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = 1.0 - uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BasisPtr scenario_basis(const ScenarioConfig& cfg, const BodyParams& params) {
  const int qdeg = cfg.quad_degree > 0 ? cfg.quad_degree : required_quad_degree(cfg.basis_n);
  return build_or_load_basis(cfg.basis_n, qdeg, params, cfg.cache_dir);
}

BasisPtr scenario_basis(const ScenarioConfig& cfg) { return scenario_basis(cfg, cfg.body); }

std::optional<SteadyState> scenario_steady(const ScenarioConfig& cfg, const RigidFluidModel& model) {
  if (!cfg.steady) return std::nullopt;
  SteadyOptions opts;
  opts.branch_sign = cfg.steady->branch;
  return make_steady(cfg.steady->family, cfg.steady->alpha, model, opts);
}

namespace {

// Fixes the sign so that the largest entry is positive.
Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  if (v[i] < 0.0) v = -v;
  return v;
}

Eigen::VectorXd unstable_direction(const SteadyState& s, const RigidFluidModel& model) {
  const Eigen::MatrixXd l = assemble_linearization(s, model);
  Eigen::EigenSolver<Eigen::MatrixXd> es(l);
  const auto ev = es.eigenvalues();
  Eigen::Index k = 0;
  ev.real().minCoeff(&k);
  if (ev[k].real() >= -default_center_tolerance(l)) {
    throw std::runtime_error("base equilibrium has no unstable eigenvalue");
  }
  Eigen::VectorXcd v = es.eigenvectors().col(k);
  Eigen::Index j = 0;
  v.cwiseAbs().maxCoeff(&j);
  v *= std::conj(v[j]) / std::abs(v[j]);
  return v.real();
}

}  // namespace

SystemState initial_state(const ScenarioConfig& cfg, const RigidFluidModel& model,
                          std::vector<std::string>* warnings) {
  const CounterRng rng{cfg.seed};
  const int n = model.basis_size();
  const int d = model.dim();

  if (const auto steady = scenario_steady(cfg, model)) {
    Eigen::VectorXd u = pack(steady->state);
    if (cfg.perturbation > 0.0) {
      Eigen::VectorXd dir(d);
      if (cfg.perturbation_mode == "unstable") {
        dir = unstable_direction(*steady, model);
      } else {
        for (int i = 0; i < d; ++i) dir[i] = rng.normal(static_cast<std::uint64_t>(i));
      }
      dir = canonical_sign(dir);
      u += cfg.perturbation * dir.normalized();
    }
    SystemState s = unpack(u, n);
    s.gamma.normalize();
    return s;
  }

  SystemState s;
  s.c = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) s.c[i] = cfg.c0_amplitude * (2.0 * rng.uniform(static_cast<std::uint64_t>(i)) - 1.0);
  s.omega = cfg.omega0;
  s.gamma = cfg.gamma0.normalized();
  if (cfg.momentum) {
    const double g3 = s.gamma[2];
    if (std::abs(g3) < 1e-12) throw std::runtime_error("initial.momentum needs gamma0_3 != 0");
    const double k = model.momentum(pack(s));
    s.omega[2] += (*cfg.momentum - k) / (g3 * model.params().lambda[2]);
    if (warnings && std::abs(s.omega[2] - cfg.omega0[2]) > 0.0) {
      warnings->push_back("omega0_3 set to " + fmt(s.omega[2]) + " to reach the requested momentum");
    }
  }
  return s;
}

json equilibria_catalog(const ScenarioConfig& cfg, const RigidFluidModel& model, bool classify_members) {
  json out = json::array();
  for (Family f : enumerate_families(model.params())) {
    for (double alpha : cfg.catalog_alphas) {
      for (int branch : {1, -1}) {
        json rec{{"family", std::string(family_name(f))}, {"alpha", alpha}, {"branch", branch}};
        try {
          SteadyOptions opts;
          opts.branch_sign = branch;
          const auto s = make_steady(f, alpha, model, opts);
          rec["feasible"] = true;
          rec["steady"] = to_record(s, model.params());
          rec["genericity"] = to_record(genericity_flags(s, model.params()));
          if (classify_members) {
            const auto c = classify(s, model);
            rec["verdict"] = std::string(verdict_name(c.verdict));
            rec["kernel_dim"] = c.kernel_dim;
            rec["unstable_count"] = c.unstable_count;
            rec["gamma_s"] = number(c.split.gamma_s);
            rec["axis_margin"] = number(c.axis_margin);
          }
        } catch (const std::domain_error& e) {
          rec["feasible"] = false;
          rec["error"] = e.what();
        } catch (const std::invalid_argument& e) {
          rec["feasible"] = false;
          rec["error"] = e.what();
        }
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

namespace {

struct StageFailure : std::runtime_error {
  std::string stage;
  StageFailure(std::string st, const std::string& what) : std::runtime_error(what), stage(std::move(st)) {}
};

template <class F>
void stage(const char* name, json& report, F&& body) {
  try {
    body();
    report["stages"].push_back(name);
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

void write_plot(const std::filesystem::path& file, const Trajectory& traj, const std::vector<double>& distance) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "# t gammanorm_minus_1 K_drift E_plus_U log10_distance\n";
  const double k0 = traj.momentum.empty() ? 0.0 : traj.momentum.front();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double dist = i < distance.size() && distance[i] > 0.0 ? std::log10(distance[i])
                                                                   : std::numeric_limits<double>::quiet_NaN();
    out << fmt(traj.times[i]) << ' ' << fmt(traj.gamma_norm[i] - 1.0) << ' ' << fmt(traj.momentum[i] - k0) << ' '
        << fmt(traj.kinetic[i] + traj.potential[i]) << ' ' << fmt(dist) << '\n';
  }
}

json config_record(const ScenarioConfig& cfg) {
  json j{{"name", cfg.name},
         {"kind", cfg.kind},
         {"seed", cfg.seed},
         {"body", to_record(cfg.body)},
         {"basis", {{"n", cfg.basis_n}, {"quad_degree", cfg.quad_degree}, {"cache", cfg.cache_dir}}},
         {"run",
          {{"t_end", cfg.t_end},
           {"samples", cfg.samples},
           {"abs_tol", cfg.integrator.abs_tol},
           {"rel_tol", cfg.integrator.rel_tol}}}};
  if (cfg.steady) {
    j["steady"] = {{"family", std::string(family_name(cfg.steady->family))},
                   {"alpha", cfg.steady->alpha},
                   {"branch", cfg.steady->branch},
                   {"perturbation", cfg.perturbation},
                   {"mode", cfg.perturbation_mode}};
  }
  return j;
}

void run_toy(const ScenarioConfig& cfg, json& report) {
  stage("toy", report, [&] {
    ToyOptions opts;
    opts.t_end = cfg.t_end;
    opts.integrator = cfg.integrator;
    report["toy"] = to_record(toy_example_run(opts));
  });
}

void run_rigid(const ScenarioConfig& cfg, const std::filesystem::path& out_dir, json& report,
               std::vector<std::filesystem::path>& artifacts) {
  stage("validate", report, [&] {
    const auto v = validate_hypotheses(cfg.body);
    report["validation"] = to_record(v);
    if (!v.passed()) throw std::runtime_error("body parameters violate the standing hypotheses");
  });

  BasisPtr basis;
  stage("basis", report, [&] {
    basis = scenario_basis(cfg);
    report["basis"] = to_record(*basis);
  });
  const RigidFluidModel model(cfg.body, basis);

  std::optional<SteadyState> steady;
  std::optional<Classification> steady_class;
  stage("equilibria", report, [&] {
    report["families"] = json::array();
    for (Family f : enumerate_families(cfg.body)) report["families"].push_back(std::string(family_name(f)));
    report["catalog"] = equilibria_catalog(cfg, model, cfg.classify);
    steady = scenario_steady(cfg, model);
    if (steady) {
      json rec{{"steady", to_record(*steady, cfg.body)},
               {"genericity", to_record(genericity_flags(*steady, cfg.body))}};
      steady_class = classify(*steady, model);
      rec["classification"] = to_record(*steady_class);
      if (steady->family == Family::SP1) rec["kernel"] = to_record(kernel_residual_check(*steady, model));
      report["base"] = rec;
    }
  });

  SystemState s0;
  Trajectory traj;
  stage("integrate", report, [&] {
    std::vector<std::string> warnings;
    s0 = initial_state(cfg, model, &warnings);
    traj = integrate(model, s0, cfg.t_end, cfg.samples, cfg.integrator);
    for (const auto& w : traj.warnings) warnings.push_back(w);
    report["integration"] = to_record(traj.stats);
    for (const auto& w : warnings) report["warnings"].push_back(w);
    const auto csv = out_dir / (cfg.name + ".csv");
    write_trajectory_csv(csv, traj);
    artifacts.push_back(csv);
    if (traj.stats.blowup) throw std::runtime_error("integration stopped: " + traj.stats.message);
  });

  stage("monitors", report, [&] {
    const double tol = std::max(cfg.integrator.abs_tol, cfg.integrator.rel_tol);
    report["invariants"] = to_record(monitor_invariants(traj, 100.0 * tol));
    report["energy"] = to_record(monitor_energy(traj, model));
    report["data_conditions"] = to_record(data_condition_flags(s0, model));
  });

  const SemilinearSystem sys = make_system(model);
  DecayCertificate certificate;
  bool have_certificate = false;
  if (cfg.omega_limit) {
    stage("omega_limit", report, [&] {
      const double k = conserved_K(s0, model);
      const auto set = predict_limit_candidates(cfg.body, k, &model);
      report["prediction"] = to_record(set);
      const auto match = match_terminal(traj, set, model, cfg.tol_match);
      report["match"] = to_record(match);
      if (match.refined) {
        certificate = match.certificate;
        have_certificate = true;
      }
    });
  }
  stage("decay", report, [&] {
    if (!have_certificate) {
      certificate = certify_decay(traj.times, traj.states, sys);
      have_certificate = true;
    }
    report["certificate"] = to_record(certificate);
  });

  if (cfg.normal_form && steady && steady_class) {
    stage("normal_form", report, [&] {
      const Eigen::VectorXd base = pack(steady->state);
      const auto sample = sample_equilibrium_manifold(sys, base, steady_class->split, cfg.flattening_radius,
                                                      cfg.flattening_count);
      const auto flat = fit_flattening(sample, steady_class->split, &sys);
      json rec = to_record(flat);
      rec["samples"] = sample.points.size();
      rec["sample_failures"] = sample.failures;
      try {
        const auto nc = normal_coordinates(pack(s0), flat, steady_class->split);
        rec["initial_coordinates"] = {{"x_norm", number(nc.x.norm())},
                                      {"y_norm", number(nc.y.norm())},
                                      {"z_norm", number(nc.z.norm())}};
      } catch (const std::out_of_range& e) {
        rec["initial_coordinates"] = e.what();
      }
      report["normal_form"] = rec;
    });
  }

  if (cfg.lyapunov && steady) {
    stage("lyapunov", report, [&] {
      const Eigen::MatrixXd a = model.rhs_jacobian(pack(steady->state));
      const Eigen::VectorXd p0 = pack(s0) - pack(steady->state);
      const auto times = uniform_times(cfg.lyapunov_t_end, cfg.lyapunov_samples);
      const auto sol = integrate_ode(
          [&a](Eigen::Ref<const Eigen::VectorXd> x, Eigen::Ref<Eigen::VectorXd> dx) { dx.noalias() = a * x; }, p0,
          times, cfg.integrator);
      report["lyapunov"] = to_record(lyapunov_monitor(sol.times, sol.states, steady->alpha, steady->q, model));
    });
  }

  stage("plot", report, [&] {
    const auto plot = out_dir / (cfg.name + "_plot.dat");
    write_plot(plot, traj, have_certificate ? certificate.distance : std::vector<double>{});
    artifacts.push_back(plot);
  });
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  ScenarioResult result;
  json& report = result.report;
  report["config"] = config_record(cfg);
  report["stages"] = json::array();
  report["warnings"] = json::array();
  for (const auto& w : cfg.warnings) report["warnings"].push_back(w);

  try {
    std::filesystem::create_directories(out_dir);
    if (cfg.kind == "toy") {
      run_toy(cfg, report);
    } else {
      run_rigid(cfg, out_dir, report, result.artifacts);
    }
  } catch (const StageFailure& e) {
    result.status = 1;
    result.failed_stage = e.stage;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.status = 1;
    result.failed_stage = "setup";
    result.error = e.what();
  }
  report["status"] = result.status == 0 ? "ok" : "failed";
  if (result.status != 0) report["error"] = {{"stage", result.failed_stage}, {"message", result.error}};

  const auto file = out_dir / (cfg.name + "_report.json");
  try {
    write_json(file, report);
    result.artifacts.push_back(file);
  } catch (const std::exception& e) {
    if (result.status == 0) {
      result.status = 1;
      result.failed_stage = "report";
      result.error = e.what();
    }
  }
  return result;
}

std::string SweepTable::to_csv() const {
  std::string out;
  const auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

namespace {

struct GridPoint {
  BodyParams params;
  double alpha = 0.0;
  double offset = std::numeric_limits<double>::quiet_NaN();
};

std::vector<GridPoint> expand_grid(const ScenarioConfig& cfg) {
  const auto& s = cfg.sweep;
  const auto axis = [](const std::vector<double>& v, double base) {
    return v.empty() ? std::vector<double>{base} : v;
  };
  const double base_alpha = cfg.steady ? cfg.steady->alpha : 0.5;
  const bool by_offset = !s.condition_offsets.empty();
  const auto alphas = by_offset ? s.condition_offsets : axis(s.alpha, base_alpha);

  std::vector<GridPoint> grid;
  for (double b2 : axis(s.beta2, cfg.body.beta2))
    for (double l1 : axis(s.lambda1, cfg.body.lambda[0]))
      for (double l2 : axis(s.lambda2, cfg.body.lambda[1]))
        for (double l3 : axis(s.lambda3, cfg.body.lambda[2]))
          for (double nu : axis(s.nu, cfg.body.nu))
            for (double a : alphas) {
              GridPoint g;
              g.params = cfg.body;
              g.params.beta2 = b2;
              g.params.lambda = Vec3(l1, l2, l3);
              g.params.nu = nu;
              if (by_offset) {
                g.offset = a;
                const double gap = l3 - g.params.lambda[s.condition_index - 1];
                g.alpha = gap > 0.0 ? std::sqrt((1.0 + a) * b2 / gap) : std::numeric_limits<double>::quiet_NaN();
              } else {
                g.alpha = a;
              }
              grid.push_back(g);
            }
  return grid;
}

std::vector<std::string> sweep_point(const GridPoint& g, const SweepSpec& spec, const BasisPtr& basis,
                                     std::size_t index) {
  std::vector<std::string> row{std::to_string(index), fmt(g.alpha), fmt(g.offset), fmt(g.params.beta2),
                               fmt(g.params.lambda[0]), fmt(g.params.lambda[1]), fmt(g.params.lambda[2]),
                               fmt(g.params.nu), std::string(family_name(spec.family)), std::to_string(spec.branch)};
  constexpr std::size_t kResultColumns = 11;
  try {
    if (!std::isfinite(g.alpha)) throw std::domain_error("no spin rate reaches this condition value");
    const auto v = validate_hypotheses(g.params);
    if (!v.passed()) throw std::invalid_argument("parameters violate the standing hypotheses");
    const RigidFluidModel model(g.params, basis);
    SteadyOptions opts;
    opts.branch_sign = spec.branch;
    const auto s = make_steady(spec.family, g.alpha, model, opts);
    const auto c = classify(s, model);
    const auto gen = genericity_flags(s, g.params);
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& cond : gen.conditions) gap = std::min(gap, std::abs(cond.value - cond.target));
    const double k = model.momentum(pack(s.state));
    const auto set = predict_limit_candidates(g.params, k);
    const auto count = [&](Family f) {
      const auto v = set.of(f);
      return std::to_string(std::count_if(v.begin(), v.end(), [](const LimitCandidate* p) { return p->feasible; }));
    };
    row.insert(row.end(), {std::string(verdict_name(c.verdict)), std::to_string(c.kernel_dim),
                           std::to_string(c.unstable_count), fmt(c.split.gamma_s), fmt(c.axis_margin),
                           gen.passed() ? "1" : "0", fmt(gap), fmt(k), count(Family::PR), count(Family::SP1),
                           count(Family::SP2)});
    row.emplace_back();
  } catch (const std::exception& e) {
    row.resize(row.size() + kResultColumns);
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    row.push_back(msg);
  }
  return row;
}

}  // namespace

SweepTable run_sweep(const ScenarioConfig& cfg, unsigned workers) {
  SweepTable table;
  table.header = {"index", "alpha", "condition_offset", "beta2", "lambda1", "lambda2", "lambda3", "nu", "family",
                  "branch", "verdict", "kernel_dim", "unstable_count", "gamma_s", "axis_margin", "generic",
                  "condition_gap", "K", "candidates_pr", "candidates_sp1", "candidates_sp2", "error"};
  const auto grid = expand_grid(cfg);

  // The basis depends on the body only through rho and nu; one shared instance per value.
  std::map<std::pair<double, double>, BasisPtr> bases;
  for (const auto& g : grid) {
    const auto key = std::make_pair(g.params.rho, g.params.nu);
    if (!bases.count(key)) bases[key] = scenario_basis(cfg, g.params);
  }

  table.rows.resize(grid.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      const auto& g = grid[i];
      table.rows[i] = sweep_point(g, cfg.sweep, bases.at({g.params.rho, g.params.nu}), i);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(grid.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return table;
}

}  // namespace fluidtop
