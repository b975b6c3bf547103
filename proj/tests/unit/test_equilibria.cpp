#include "fluidtop/equilibria.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace fluidtop;

TEST(Equilibria, FamilyNamesRoundTrip) {
  for (Family f : {Family::PR, Family::SP, Family::SP1, Family::SP2}) {
    EXPECT_EQ(parse_family(family_name(f)), f);
  }
  EXPECT_FALSE(parse_family("XY").has_value());
}

TEST(Equilibria, FamiliesFollowMomentPattern) {
  BodyParams p = test::standard_params();
  EXPECT_EQ(enumerate_families(p), (std::vector<Family>{Family::PR, Family::SP1, Family::SP2}));
  p.lambda = Vec3(2.0, 2.0, 2.0);
  EXPECT_EQ(enumerate_families(p), (std::vector<Family>{Family::PR}));
  p.lambda = Vec3(2.0, 1.0, 1.0);
  EXPECT_EQ(enumerate_families(p), (std::vector<Family>{Family::PR, Family::SP1}));
  p.lambda = Vec3(1.0, 2.0, 1.0);
  EXPECT_EQ(enumerate_families(p), (std::vector<Family>{Family::PR, Family::SP2}));
}

TEST(Equilibria, TiltedSpinClosedForm) {
  const auto p = test::standard_params();
  for (int branch : {1, -1}) {
    SteadyOptions o;
    o.branch_sign = branch;
    const auto s = make_steady(Family::SP1, 1.0, p, o);
    EXPECT_NEAR(s.q[0], branch * std::sqrt(3.0) / 2.0, 1e-15);
    EXPECT_EQ(s.q[1], 0.0);
    EXPECT_NEAR(s.q[2], -0.5, 1e-15);
    const Vec3 lhs = s.alpha * s.alpha * s.q.cross(inertia_apply(p, s.q));
    const Vec3 rhs = p.beta2 * kE3.cross(s.q);
    EXPECT_LE((lhs - rhs).norm(), 1e-14);
    EXPECT_LE((rhs - Vec3(0.0, branch * std::sqrt(3.0) / 2.0, 0.0)).norm(), 1e-15);
    EXPECT_LE(steady_identity_residual(s, p), 1e-14);
  }
}

TEST(Equilibria, AxisHeightFormula) {
  const auto p = test::standard_params();
  for (double alpha : {0.8, 1.0, 1.7, -1.3}) {
    EXPECT_NEAR(sp_axis_height(Family::SP1, alpha, p), -1.0 / (alpha * alpha * 2.0), 1e-15);
    EXPECT_NEAR(sp_axis_height(Family::SP2, alpha, p), -1.0 / (alpha * alpha * 1.0), 1e-15);
  }
}

TEST(Equilibria, InfeasibleCompletionThrows) {
  const auto p = test::standard_params();
  EXPECT_THROW((void)make_steady(Family::SP1, 0.5, p), std::domain_error);
  EXPECT_THROW((void)make_steady(Family::SP, 1.0, p), std::invalid_argument);
  EXPECT_THROW((void)make_steady(Family::SP1, 0.0, p), std::invalid_argument);
}

TEST(Equilibria, EveryMemberIsAnEquilibriumOfTheCoupledSystem) {
  const auto model = test::standard_model(8);
  for (Family f : {Family::PR, Family::SP1, Family::SP2}) {
    for (double alpha : {1.1, 1.5, -1.2, 2.0}) {
      for (int branch : {1, -1}) {
        SteadyOptions o;
        o.branch_sign = branch;
        const auto s = make_steady(f, alpha, model, o);
        EXPECT_LE(model.rhs(pack(s.state)).norm(), 1e-13);
        EXPECT_NEAR(s.state.gamma.norm(), 1.0, 1e-15);
        EXPECT_LE(s.state.c.norm(), 0.0);
      }
    }
  }
}

// Reversing the spin maps a member onto a member.
TEST(Equilibria, SpinReversalSymmetry) {
  const auto p = test::standard_params();
  for (Family f : {Family::PR, Family::SP1, Family::SP2}) {
    const auto a = make_steady(f, 1.3, p);
    const auto b = make_steady(f, -1.3, p);
    EXPECT_LE((a.q - b.q).norm(), 1e-15);
    EXPECT_LE((a.state.omega + b.state.omega).norm(), 1e-15);
    EXPECT_LE(steady_identity_residual(b, p), 1e-14);
  }
}

TEST(Equilibria, GenericityBandAroundPermanentRotationBoundary) {
  const auto p = test::standard_params();
  const auto at = [&](double offset) {
    return genericity_flags(make_steady(Family::PR, std::sqrt(1.0 + offset), p), p);
  };
  EXPECT_TRUE(at(1e-3).passed());
  EXPECT_TRUE(at(-2e-6).passed());
  EXPECT_TRUE(at(0.5e-6).degenerate());
  EXPECT_TRUE(at(0.0).degenerate());
  EXPECT_TRUE(at(-0.9e-6).degenerate());
}

TEST(Equilibria, TiltedSpinGenericityCondition) {
  const auto p = test::standard_params();
  // 3 beta^4 = alpha^4 lambda1 (lambda3 - lambda1) at alpha^4 = 3/2
  const double critical = std::pow(1.5, 0.25);
  EXPECT_TRUE(genericity_flags(make_steady(Family::SP1, critical, p), p).degenerate());
  EXPECT_TRUE(genericity_flags(make_steady(Family::SP1, 1.0, p), p).passed());
}

TEST(Equilibria, NewtonRecoversPerturbedEquilibrium) {
  const auto model = test::standard_model(8);
  for (Family f : {Family::PR, Family::SP1}) {
    const auto s = make_steady(f, 1.2, model);
    Eigen::VectorXd guess = pack(s.state) + 1e-4 * test::random_vector(model.dim(), 5);
    const auto res = newton_refine(unpack(guess, 8), model);
    ASSERT_TRUE(res.converged) << res.message;
    EXPECT_FALSE(res.rank_deficient);
    EXPECT_LE(model.rhs(pack(res.steady.state)).norm(), 1e-12);
    EXPECT_EQ(res.steady.family, f);
    EXPECT_NEAR(res.steady.alpha, 1.2, 1e-3);
  }
}

TEST(Equilibria, IdentifyReadsSpinAndAxis) {
  const auto model = test::standard_model(5);
  const auto s = make_steady(Family::SP2, 1.4, model);
  const auto id = identify_steady(pack(s.state), model);
  EXPECT_EQ(id.family, Family::SP2);
  EXPECT_NEAR(id.alpha, 1.4, 1e-14);
  EXPECT_LE((id.q - s.q).norm(), 1e-14);
}

TEST(Equilibria, DataConditionsFlagVanishingSpin) {
  const auto p = test::standard_params();
  EXPECT_TRUE(data_condition_flags(0.0, p).zero_spin);
  EXPECT_FALSE(data_condition_flags(1.5, p).zero_spin);
}
