#include "fluidtop/scenario.hpp"
#include "fluidtop/spectral.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace fluidtop;

namespace {

std::string field_of(const std::string& yaml) {
  try {
    (void)parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fluidtop_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

const char* kSweep = R"(
name: sweep
body: {lambda: [1, 2, 3], beta2: 1, rho: 0.5, nu: 0.5}
basis: {n: 5}
sweep:
  family: PR
  branch: -1
  condition_offsets: [-0.01, -1.0e-7, 0.0, 1.0e-7, 0.01]
  nu: [0.5, 0.25]
)";

}  // namespace

TEST(Scenario, DefaultsWithoutFile) {
  const auto cfg = parse_config("");
  EXPECT_EQ(cfg.kind, "rigid_fluid");
  EXPECT_EQ(cfg.basis_n, 8);
  EXPECT_TRUE(cfg.warnings.empty());
}

TEST(Scenario, ConfigErrorsNameTheField) {
  EXPECT_EQ(field_of("body: {nu: -0.1}"), "body.nu");
  EXPECT_EQ(field_of("body: {lambda: [1, 2]}"), "body.lambda");
  EXPECT_EQ(field_of("body: {rho: abc}"), "body.rho");
  EXPECT_EQ(field_of("basis: {n: 999}"), "basis.n");
  EXPECT_EQ(field_of("run: {t_end: 0}"), "run.t_end");
  EXPECT_EQ(field_of("initial: {steady: {family: XY}}"), "initial.steady.family");
  EXPECT_EQ(field_of("initial: {gamma0: [0, 0, 0]}"), "initial.gamma0");
  EXPECT_EQ(field_of("initial: {perturbation: {mode: sideways}}"), "initial.perturbation.mode");
  EXPECT_EQ(field_of("bodyy: {}"), "bodyy");
  EXPECT_EQ(field_of("kind: fluid"), "kind");
  EXPECT_EQ(field_of("sweep: {alpha: [1], condition_offsets: [0]}"), "sweep.condition_offsets");
  EXPECT_EQ(field_of("body: [1, 2"), "<root>");
}

TEST(Scenario, GammaIsNormalizedOnLoad) {
  const auto cfg = parse_config("initial: {gamma0: [0, 0, 2]}");
  EXPECT_EQ(cfg.gamma0, kE3);
  ASSERT_EQ(cfg.warnings.size(), 1u);
  const auto quiet = parse_config("initial: {gamma0: [0, 0.6, 0.8]}");
  EXPECT_TRUE(quiet.warnings.empty());
}

TEST(Scenario, ShippedConfigsParse) {
  for (const char* name : {"sp1_stable", "toy_example", "dissipative_k15", "pr_boundary_sweep"}) {
    const auto cfg = load_config(std::filesystem::path(FLUIDTOP_CONFIG_DIR) / (std::string(name) + ".yaml"));
    EXPECT_EQ(cfg.name, name);
  }
}

TEST(Scenario, CounterRngIsStatelessAndUniform) {
  const CounterRng a{42}, b{42}, c{43};
  EXPECT_EQ(a.bits(7), b.bits(7));
  EXPECT_NE(a.bits(7), c.bits(7));
  double mean = 0.0, var = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform(static_cast<std::uint64_t>(i));
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = a.normal(static_cast<std::uint64_t>(i));
    mean += z;
    var += z * z;
  }
  EXPECT_NEAR(mean / n, 0.0, 0.03);
  EXPECT_NEAR(var / n, 1.0, 0.05);
}

TEST(Scenario, MomentumTargetSetsSpin) {
  auto cfg = parse_config(R"(
basis: {n: 5}
body: {nu: 0.5, rho: 0.5}
initial: {c0: {amplitude: 0.05}, omega0: [0.2, -0.1, 0.0], gamma0: [0.3, -0.2, 1.0], momentum: 1.5}
)");
  const RigidFluidModel model(cfg.body, scenario_basis(cfg));
  const auto s0 = initial_state(cfg, model);
  EXPECT_NEAR(model.momentum(pack(s0)), 1.5, 1e-14);
  EXPECT_NEAR(s0.gamma.norm(), 1.0, 1e-15);
  // same seed, same state
  EXPECT_EQ(pack(initial_state(cfg, model)), pack(s0));
  cfg.seed += 1;
  EXPECT_NE(pack(initial_state(cfg, model)), pack(s0));
}

TEST(Scenario, UnstablePerturbationLeavesTheSphere) {
  const auto cfg = parse_config(R"(
basis: {n: 5}
body: {nu: 0.5, rho: 0.5}
initial: {steady: {family: SP1, alpha: 1.0}, perturbation: {amplitude: 1.0e-3, mode: unstable}}
)");
  const RigidFluidModel model(cfg.body, scenario_basis(cfg));
  const auto s0 = initial_state(cfg, model);
  EXPECT_NEAR(s0.gamma.norm(), 1.0, 1e-15);
  const auto base = scenario_steady(cfg, model);
  EXPECT_NEAR((pack(s0) - pack(base->state)).norm(), 1e-3, 1e-6);
}

TEST(Scenario, SweepIsIndependentOfWorkerCount) {
  const auto cfg = parse_config(kSweep);
  const auto one = run_sweep(cfg, 1).to_csv();
  const auto many = run_sweep(cfg, 6).to_csv();
  EXPECT_EQ(one, many);
  EXPECT_EQ(one, run_sweep(cfg, 1).to_csv());
}

TEST(Scenario, SweepRowsFollowTheGrid) {
  const auto t = run_sweep(parse_config(kSweep), 3);
  ASSERT_EQ(t.rows.size(), 10u);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(t.header.begin(), t.header.end(), name) - t.header.begin());
  };
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(t.rows[i][0], std::to_string(i));
    EXPECT_EQ(t.rows[i].size(), t.header.size());
  }
  EXPECT_EQ(t.rows[0][col("verdict")], "NormallyHyperbolic");
  EXPECT_EQ(t.rows[2][col("verdict")], "Degenerate");
  EXPECT_EQ(t.rows[4][col("verdict")], "NormallyStable");
}

TEST(Scenario, SweepRecordsPerPointFailures) {
  const auto t = run_sweep(parse_config(R"(
basis: {n: 5}
body: {nu: 0.5, rho: 0.5}
sweep: {family: SP1, alpha: [0.5, 1.0]}
)"),
                           2);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_FALSE(t.rows[0].back().empty());
  EXPECT_TRUE(t.rows[1].back().empty());
}

TEST(Scenario, OnePointSweepMatchesClassification) {
  const auto cfg = parse_config(R"(
basis: {n: 5}
body: {nu: 0.5, rho: 0.5}
initial: {steady: {family: SP1, alpha: 1.0}}
sweep: {family: SP1, alpha: [1.0]}
)");
  const auto t = run_sweep(cfg, 1);
  const RigidFluidModel model(cfg.body, scenario_basis(cfg));
  const auto c = classify(*scenario_steady(cfg, model), model);
  const auto verdict = std::find(t.header.begin(), t.header.end(), "verdict") - t.header.begin();
  EXPECT_EQ(t.rows.at(0).at(static_cast<std::size_t>(verdict)), verdict_name(c.verdict));
}

TEST(Scenario, ToyScenarioWritesReport) {
  const auto dir = scratch("toy");
  const auto r = run_scenario(parse_config("name: toy\nkind: toy\nrun: {t_end: 25}"), dir);
  EXPECT_EQ(r.status, 0) << r.error;
  EXPECT_TRUE(std::filesystem::exists(dir / "toy_report.json"));
  EXPECT_EQ(r.report["toy"]["stable_line"]["verdict"], "NormallyStable");
  std::filesystem::remove_all(dir);
}

TEST(Scenario, FailingStageIsNamedAndReportKept) {
  const auto dir = scratch("bad");
  const auto r = run_scenario(parse_config("name: bad\nbody: {lambda: [2, 2, 3]}\nbasis: {n: 3}"), dir);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.failed_stage, "validate");
  EXPECT_TRUE(std::filesystem::exists(dir / "bad_report.json"));
  EXPECT_EQ(r.report["error"]["stage"], "validate");
  std::filesystem::remove_all(dir);
}

TEST(Scenario, RigidScenarioArtifactsAreDeterministic) {
  const std::string yaml = R"(
name: short
seed: 3
basis: {n: 5}
body: {nu: 0.5, rho: 0.5}
initial: {c0: {amplitude: 0.05}, omega0: [0.2, -0.1, 0.5], gamma0: [0.3, -0.2, 1.0]}
run: {t_end: 5, samples: 50}
analysis: {catalog_alphas: [1.0]}
)";
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run_scenario(parse_config(yaml), a);
  const auto rb = run_scenario(parse_config(yaml), b);
  ASSERT_EQ(ra.status, 0) << ra.failed_stage << ": " << ra.error;
  for (const char* f : {"short.csv", "short_plot.dat", "short_report.json"}) {
    std::ifstream fa(a / f), fb(b / f);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
    EXPECT_FALSE(sa.empty()) << f;
    EXPECT_EQ(sa, sb) << f;
  }
  EXPECT_TRUE(ra.report["invariants"]["passed"]);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}
