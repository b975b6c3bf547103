#include "fluidtop/body.hpp"

#include <gtest/gtest.h>

using namespace fluidtop;

TEST(Body, StandardParametersPassValidation) {
  BodyParams p;
  p.lambda = Vec3(1.0, 2.0, 3.0);
  p.nu = 0.5;
  const auto r = validate_hypotheses(p);
  EXPECT_TRUE(r.passed());
  ASSERT_NE(r.find("hypothesis_iv"), nullptr);
  EXPECT_TRUE(r.find("hypothesis_iv")->passed);
}

TEST(Body, ExcludedMomentPatternIsRejected) {
  BodyParams p;
  p.lambda = Vec3(2.0, 2.0, 3.0);
  const auto r = validate_hypotheses(p);
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(r.find("hypothesis_iv")->passed);

  p.lambda = Vec3(2.0, 2.0, 2.0);
  EXPECT_TRUE(validate_hypotheses(p).find("hypothesis_iv")->passed);
  p.lambda = Vec3(1.0, 2.0, 2.0);
  EXPECT_TRUE(validate_hypotheses(p).find("hypothesis_iv")->passed);
}

TEST(Body, NonPositiveParametersAreRejected) {
  BodyParams p;
  p.nu = -0.1;
  const auto r = validate_hypotheses(p);
  EXPECT_FALSE(r.passed());
  EXPECT_NE(r.find("positive")->detail.find("nu"), std::string::npos);
}

TEST(Body, TriangleInequalityOfMoments) {
  BodyParams p;
  p.lambda = Vec3(1.0, 1.5, 3.0);
  EXPECT_FALSE(validate_hypotheses(p).find("realizable")->passed);
}

TEST(Body, SkewMatchesCrossProduct) {
  const Vec3 a(0.3, -1.2, 2.0), b(-0.7, 0.1, 0.4);
  EXPECT_LE((skew(a) * b - a.cross(b)).norm(), 1e-15);
  EXPECT_LE((skew(a) + skew(a).transpose()).norm(), 0.0);
}

TEST(Body, CavityFluidInertiaOfUnitBall) {
  // rho * 8 pi / 15 for the unit ball about a diameter
  EXPECT_NEAR(cavity_fluid_inertia(1.0), 8.0 * M_PI / 15.0, 1e-14);
  EXPECT_NEAR(cavity_fluid_inertia(0.5), 4.0 * M_PI / 15.0, 1e-14);
}
