#pragma once

#include "fluidtop/body.hpp"
#include "fluidtop/dynamics.hpp"
#include "fluidtop/equilibria.hpp"
#include "fluidtop/galerkin.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluidtop {

/// Raised while reading a configuration; field() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SteadySpec {
  Family family = Family::PR;
  double alpha = 0.5;
  int branch = 1;
};

/// Cartesian grid; an empty axis keeps the base value.
struct SweepSpec {
  std::vector<double> alpha;
  /// Alternative to alpha: alpha^2 (lambda3 - lambda_i) / beta2 = 1 + offset, i = condition_index.
  std::vector<double> condition_offsets;
  int condition_index = 2;
  std::vector<double> beta2;
  std::vector<double> nu;
  std::vector<double> lambda1;
  std::vector<double> lambda2;
  std::vector<double> lambda3;
  Family family = Family::PR;
  int branch = 1;
};

/// Every default lives here.
struct ScenarioConfig {
  std::string name = "scenario";
  std::string kind = "rigid_fluid";  ///< or "toy"
  BodyParams body{};
  int basis_n = 8;
  int quad_degree = 0;  ///< 0 selects the exact degree
  std::string cache_dir;

  std::optional<SteadySpec> steady;   ///< base equilibrium for the initial state
  double perturbation = 0.0;          ///< amplitude of the seeded perturbation of the base equilibrium
  std::string perturbation_mode = "random";  ///< "random" or "unstable"
  double c0_amplitude = 0.0;          ///< seeded random fluid coefficients when no base equilibrium is set
  Vec3 omega0 = Vec3::Zero();
  Vec3 gamma0 = kE3;
  std::optional<double> momentum;     ///< adjusts omega0_3 so that K takes this value

  double t_end = 100.0;
  std::size_t samples = 1000;
  IntegratorOptions integrator{};

  bool classify = true;
  bool normal_form = true;
  bool omega_limit = true;
  bool lyapunov = false;
  double lyapunov_t_end = 5.0;
  std::size_t lyapunov_samples = 2000;
  double flattening_radius = 1e-4;
  int flattening_count = 5;
  double tol_match = 1e-4;
  std::vector<double> catalog_alphas{0.5, 1.0, 1.5};

  SweepSpec sweep;
  std::uint64_t seed = 1;
  std::vector<std::string> warnings;
};

[[nodiscard]] ScenarioConfig parse_config(const std::string& yaml_text);
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& file);

/// Stateless generator: the value depends only on (seed, counter).
struct CounterRng {
  std::uint64_t seed = 0;
  [[nodiscard]] std::uint64_t bits(std::uint64_t counter) const;
  [[nodiscard]] double uniform(std::uint64_t counter) const;  ///< [0, 1)
  [[nodiscard]] double normal(std::uint64_t counter) const;
};

[[nodiscard]] BasisPtr scenario_basis(const ScenarioConfig& cfg, const BodyParams& params);
[[nodiscard]] BasisPtr scenario_basis(const ScenarioConfig& cfg);
[[nodiscard]] std::optional<SteadyState> scenario_steady(const ScenarioConfig& cfg, const RigidFluidModel& model);
[[nodiscard]] SystemState initial_state(const ScenarioConfig& cfg, const RigidFluidModel& model,
                                        std::vector<std::string>* warnings = nullptr);

/// Family members at the configured spin rates, optionally classified.
[[nodiscard]] nlohmann::json equilibria_catalog(const ScenarioConfig& cfg, const RigidFluidModel& model,
                                                bool classify);

struct ScenarioResult {
  int status = 0;
  std::string failed_stage;
  std::string error;
  nlohmann::json report;
  std::vector<std::filesystem::path> artifacts;
};

/// validate, basis, equilibria, integrate, monitors, omega-limit, normal form;
/// writes <name>.csv, <name>_report.json and <name>_plot.dat into out_dir.
[[nodiscard]] ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

struct SweepTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  [[nodiscard]] std::string to_csv() const;
};

/// One classification and prediction record per grid point, computed on
/// `workers` threads; row order follows the grid.
[[nodiscard]] SweepTable run_sweep(const ScenarioConfig& cfg, unsigned workers);

}  // namespace fluidtop
