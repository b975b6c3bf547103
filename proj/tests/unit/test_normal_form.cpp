#include "fluidtop/normal_form.hpp"
#include "fluidtop/spectral.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace fluidtop;

namespace {

// u' = -A u with a one-dimensional kernel; every point of the first axis is an equilibrium.
SemilinearSystem linear_system(const Eigen::Vector3d& rates) {
  SemilinearSystem sys;
  sys.dim = 3;
  const Eigen::MatrixXd a = rates.asDiagonal();
  sys.rhs = [a](const Eigen::VectorXd& u) { return Eigen::VectorXd(-a * u); };
  sys.jacobian = [a](const Eigen::VectorXd&) { return Eigen::MatrixXd(-a); };
  return sys;
}

}  // namespace

TEST(NormalForm, ToyExampleBehaviours) {
  const auto r = toy_example_run();
  EXPECT_EQ(r.stable_line.verdict, Verdict::NormallyStable);
  EXPECT_EQ(r.hyperbolic_line.verdict, Verdict::NormallyHyperbolic);
  EXPECT_LE(r.converging_terminal.norm(), 1e-9);
  ASSERT_TRUE(r.converging_certificate.converged);
  EXPECT_TRUE(r.converging_certificate.clean);
  EXPECT_NEAR(r.converging_certificate.rate, 1.0, 0.05);
  EXPECT_LE(r.converging_certificate.u_inf.norm(), 1e-12);
  EXPECT_TRUE(r.blowup);
  EXPECT_NEAR(r.blowup_time, std::log(11.0), 1e-3);
  EXPECT_TRUE(r.escaped);
  EXPECT_EQ(r.fixed_terminal, Eigen::Vector2d(0.3, 0.0));
  // the line y = 1 is already flat
  EXPECT_LE(r.flattening.fit_residual, 1e-12);
  EXPECT_LE(r.flattening.derivative_norm, 1e-12);
}

TEST(NormalForm, CertificateRecoversKnownRate) {
  const auto sys = linear_system(Eigen::Vector3d(0.0, 0.7, 2.0));
  // a pure mode is fitted exactly; a decaying fast mode biases the slope slightly
  for (const auto& [fast, tol] : {std::pair{0.0, 1e-9}, std::pair{-0.1, 1e-4}}) {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> u;
    for (int i = 0; i <= 400; ++i) {
      const double ti = 0.1 * i;
      t.push_back(ti);
      u.emplace_back(Eigen::Vector3d(0.25, 0.3 * std::exp(-0.7 * ti), fast * std::exp(-2.0 * ti)));
    }
    const auto c = certify_decay(t, u, sys);
    ASSERT_TRUE(c.converged) << c.message;
    EXPECT_TRUE(c.clean);
    EXPECT_NEAR(c.rate, 0.7, tol);
    EXPECT_NEAR(c.gamma_s, 0.7, 1e-12);
    EXPECT_NEAR(c.ratio, 1.0, tol / 0.7);
    EXPECT_GT(c.r2, 0.9999);
    EXPECT_LE((c.u_inf - Eigen::Vector3d(0.25, 0.0, 0.0)).norm(), 1e-12);
  }
}

TEST(NormalForm, UnsettledTrajectoryIsNotCertified) {
  const auto sys = linear_system(Eigen::Vector3d(0.0, 0.7, 2.0));
  std::vector<double> t{0.0, 1.0};
  std::vector<Eigen::VectorXd> u{Eigen::Vector3d(0.0, 1.0, 0.0), Eigen::Vector3d(0.0, 0.5, 0.0)};
  EXPECT_FALSE(certify_decay(t, u, sys).converged);
}

TEST(NormalForm, MinNormNewtonStaysOnTheNearestEquilibrium) {
  const auto sys = toy_system();
  const auto r = min_norm_newton(sys, Eigen::Vector2d(0.3, 1e-3));
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR((*r)[0], 0.3, 1e-15);
  EXPECT_LE(std::abs((*r)[1]), 1e-14);
}

TEST(NormalForm, JacobianAgreesWithDifferencesAtEquilibria) {
  const auto model = test::standard_model(8);
  const auto sys = make_system(model);
  for (Family f : {Family::PR, Family::SP1, Family::SP2}) {
    for (double alpha : {0.5, 1.0, 1.4}) {
      try {
        const auto s = make_steady(f, alpha, model);
        EXPECT_LE(jacobian_fd_mismatch(sys, pack(s.state)), 1e-6);
      } catch (const std::domain_error&) {
      }
    }
  }
  EXPECT_LE(jacobian_fd_mismatch(toy_system(), Eigen::Vector2d(0.2, 0.7)), 1e-8);
}

TEST(NormalForm, FlatteningOfTheTiltedSpinManifold) {
  const auto model = test::standard_model(5);
  const auto sys = make_system(model);
  const auto s = make_steady(Family::SP1, 1.0, model);
  const Eigen::VectorXd base = pack(s.state);
  const auto split = spectral_split(sys.linearization(base));
  const auto sample = sample_equilibrium_manifold(sys, base, split, 1e-4, 5);
  EXPECT_EQ(sample.failures, 0);
  // 5x5 grid clipped to the disk keeps 13 nodes
  ASSERT_EQ(sample.points.size(), 13u);
  const auto& lam = model.params().lambda;
  for (const auto& p : sample.points) {
    EXPECT_LE(model.rhs(p).norm(), 1e-11);
    // still on the tilted-spin family: omega = alpha gamma and gamma_3 alpha^2 = -beta^2/(lambda_3 - lambda_1)
    const auto st = unpack(p, 5);
    const double alpha = st.omega[0] / st.gamma[0];
    EXPECT_LE((st.omega - alpha * st.gamma).norm(), 1e-10);
    EXPECT_NEAR(st.gamma[2] * alpha * alpha, -model.params().beta2 / (lam[2] - lam[0]), 1e-10);
  }

  const auto flat = fit_flattening(sample, split, &sys);
  // the graph map is tangent to the center space at the base point
  EXPECT_LE(flat.derivative_norm, 1e-6);
  EXPECT_LE(flat.fit_residual, 1e-9);
  EXPECT_LE(flat.equation_residual, 1e-8);
  EXPECT_GT(flat.validity_radius, 0.0);

  // coordinates reconstruct the state
  const Eigen::VectorXd u = base + 1e-6 * test::random_vector(model.dim(), 3);
  const auto nc = normal_coordinates(u, flat, split);
  EXPECT_LE((reconstruct(nc, flat) - u).norm(), 1e-13);
  EXPECT_THROW((void)normal_coordinates(base + 10.0 * sample.center_basis.col(0), flat, split), std::out_of_range);
}

// Cubic terms the quadratic model cannot carry leak into the slope at O(r^2).
TEST(NormalForm, FittedSlopeShrinksQuadraticallyWithRadius) {
  const auto model = test::standard_model(5);
  const auto sys = make_system(model);
  const Eigen::VectorXd base = pack(make_steady(Family::SP1, 1.0, model).state);
  const auto split = spectral_split(sys.linearization(base));
  const auto slope = [&](double r) {
    return fit_flattening(sample_equilibrium_manifold(sys, base, split, r, 5), split).derivative_norm;
  };
  const double ratio = slope(4e-4) / slope(2e-4);
  EXPECT_NEAR(ratio, 4.0, 0.1);
}

TEST(NormalForm, QuadraticFeatures) {
  const Eigen::Vector2d xi(2.0, 3.0);
  const auto f = QuadraticMap::features(xi);
  ASSERT_EQ(f.size(), 5);
  EXPECT_EQ(f[0], 2.0);
  EXPECT_EQ(f[1], 3.0);
  EXPECT_EQ(f.tail(3).sum(), 4.0 + 6.0 + 9.0);
}
