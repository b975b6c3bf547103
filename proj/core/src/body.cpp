#include "fluidtop/body.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fluidtop {

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const HypothesisCheck& c) { return c.passed || !c.fatal; });
}

const HypothesisCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool moments_equal(double a, double b) {
  return std::abs(a - b) <= kMomentEqualityTol * std::max(std::abs(a), std::abs(b));
}

double cavity_fluid_inertia(double rho) {
  return 8.0 * std::numbers::pi * rho / 15.0;
}

ValidationReport validate_hypotheses(const BodyParams& params) {
  ValidationReport report;
  const Vec3& l = params.lambda;

  {
    HypothesisCheck c{"positive", true, true, ""};
    std::ostringstream msg;
    auto require = [&](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        c.passed = false;
        msg << name << "=" << v << " is not strictly positive; ";
      }
    };
    require(l.x(), "lambda1");
    require(l.y(), "lambda2");
    require(l.z(), "lambda3");
    require(params.beta2, "beta2");
    require(params.rho, "rho");
    require(params.nu, "nu");
    c.detail = msg.str();
    report.checks.push_back(std::move(c));
  }

  {
    HypothesisCheck c{"realizable", true, true, ""};
    for (int i = 0; i < 3; ++i) {
      const double others = l((i + 1) % 3) + l((i + 2) % 3);
      if (l(i) > others * (1.0 + kMomentEqualityTol)) {
        c.passed = false;
        std::ostringstream msg;
        msg << "lambda" << (i + 1) << "=" << l(i) << " exceeds the sum of the other two (" << others
            << ")";
        c.detail = msg.str();
      }
    }
    report.checks.push_back(std::move(c));
  }

  {
    HypothesisCheck c{"hypothesis_iv", true, true, ""};
    if (moments_equal(l.x(), l.y()) && !moments_equal(l.y(), l.z())) {
      c.passed = false;
      c.detail = "lambda1 == lambda2 != lambda3 is excluded";
    }
    report.checks.push_back(std::move(c));
  }

  {
    // Whole-system moments must dominate the cavity fluid's own inertia, otherwise
    // the coupled fluid/rigid mass block loses definiteness as the basis grows.
    HypothesisCheck c{"fluid_inertia", true, false, ""};
    const double fluid = cavity_fluid_inertia(params.rho);
    if (!(l.minCoeff() > fluid)) {
      c.passed = false;
      std::ostringstream msg;
      msg << "min lambda=" << l.minCoeff() << " <= fluid inertia 8*pi*rho/15=" << fluid;
      c.detail = msg.str();
    }
    report.checks.push_back(std::move(c));
  }

  return report;
}

}  // namespace fluidtop
