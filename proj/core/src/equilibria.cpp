#include "fluidtop/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fluidtop {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::PR: return "PR";
    case Family::SP: return "SP";
    case Family::SP1: return "SP1";
    case Family::SP2: return "SP2";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view name) {
  for (Family f : {Family::PR, Family::SP, Family::SP1, Family::SP2}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

std::vector<Family> enumerate_families(const BodyParams& params) {
  const auto& l = params.lambda;
  const bool e12 = moments_equal(l[0], l[1]);
  const bool e23 = moments_equal(l[1], l[2]);
  const bool e13 = moments_equal(l[0], l[2]);
  if (e12 && e23) return {Family::PR};
  if (e12) return {Family::PR, Family::SP};
  if (e23) return {Family::PR, Family::SP1};
  if (e13) return {Family::PR, Family::SP2};
  return {Family::PR, Family::SP1, Family::SP2};
}

double sp_axis_height(Family family, double alpha, const BodyParams& params) {
  if (family == Family::PR) throw std::invalid_argument("sp_axis_height: PR has no fixed axis height");
  if (alpha == 0.0) throw std::invalid_argument("sp_axis_height: alpha must be nonzero");
  const auto& l = params.lambda;
  const double gap = family == Family::SP2 ? l[2] - l[1] : l[2] - l[0];
  if (gap == 0.0) throw std::invalid_argument("sp_axis_height: family unavailable for equal moments");
  return -params.beta2 / (alpha * alpha * gap);
}

namespace {

Vec3 family_axis(Family family, double alpha, const BodyParams& params, const SteadyOptions& opt) {
  const double sign = opt.branch_sign < 0 ? -1.0 : 1.0;
  if (family == Family::PR) return {0.0, 0.0, opt.unit_q ? sign : opt.free_coordinate};
  const double q3 = sp_axis_height(family, alpha, params);
  double r = opt.free_coordinate;
  if (opt.unit_q) {
    if (std::abs(q3) > 1.0) {
      throw std::domain_error("steady state infeasible on the unit sphere: |q3| = " +
                              std::to_string(std::abs(q3)) + " > 1");
    }
    r = sign * std::sqrt(std::max(0.0, 1.0 - q3 * q3));
  }
  switch (family) {
    case Family::SP1: return {r, 0.0, q3};
    case Family::SP2: return {0.0, r, q3};
    default: return {r * std::cos(opt.azimuth), r * std::sin(opt.azimuth), q3};
  }
}

}  // namespace

SteadyState make_steady(Family family, double alpha, const RigidFluidModel& model,
                        const SteadyOptions& options) {
  const auto& params = model.params();
  if (family == Family::SP && !options.allow_sp) {
    throw std::invalid_argument("SP family requested without the explicit override");
  }
  if (family != Family::PR && family != Family::SP) {
    const auto fams = enumerate_families(params);
    if (std::find(fams.begin(), fams.end(), family) == fams.end()) {
      throw std::invalid_argument(std::string(family_name(family)) + " is not an equilibrium family for these moments");
    }
  }
  SteadyState s;
  s.family = family;
  s.alpha = alpha;
  s.q = family_axis(family, alpha, params, options);
  s.state.c = Eigen::VectorXd::Zero(model.basis_size());
  s.state.omega = alpha * s.q;
  s.state.gamma = s.q;
  s.residual = model.rhs(pack(s.state)).norm();
  return s;
}

SteadyState make_steady(Family family, double alpha, const BodyParams& params,
                        const SteadyOptions& options) {
  const RigidFluidModel model(params, nullptr);
  return make_steady(family, alpha, model, options);
}

double steady_identity_residual(double alpha, const Vec3& q, const BodyParams& params) {
  return (alpha * alpha * q.cross(inertia_apply(params, q)) - params.beta2 * kE3.cross(q)).norm();
}

double steady_identity_residual(const SteadyState& s, const BodyParams& params) {
  return steady_identity_residual(s.alpha, s.q, params);
}

bool GenericityFlags::passed() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const Condition& c) { return c.passed; });
}

GenericityFlags genericity_flags(const SteadyState& s, const BodyParams& params, double margin) {
  GenericityFlags flags;
  flags.margin = margin;
  const auto& l = params.lambda;
  const double a2 = s.alpha * s.alpha;
  const double b4 = params.beta2 * params.beta2;
  auto add = [&](std::string name, double value, double target) {
    flags.conditions.push_back({std::move(name), value, target, std::abs(value - target) > margin * std::abs(target)});
  };
  flags.conditions.push_back({"alpha_nonzero", s.alpha, 0.0, s.alpha != 0.0});
  switch (s.family) {
    case Family::SP1:
      add("sp1", 3.0 * b4 / (a2 * a2 * l[0] * (l[2] - l[0])), 1.0);
      break;
    case Family::SP2:
      add("sp2", 3.0 * b4 / (a2 * a2 * l[1] * (l[2] - l[1])), 1.0);
      break;
    case Family::PR:
      add("pr_1", a2 / params.beta2 * (l[2] - l[0]), 1.0);
      add("pr_2", a2 / params.beta2 * (l[2] - l[1]), 1.0);
      break;
    case Family::SP:
      flags.conditions.push_back({"sp_unclassified", 0.0, 0.0, false});
      break;
  }
  return flags;
}

SteadyState identify_steady(const Eigen::VectorXd& u, const RigidFluidModel& model, double tol) {
  const int n = model.basis_size();
  SteadyState s;
  s.state = unpack(u, n);
  s.q = s.state.gamma;
  const double qn2 = s.q.squaredNorm();
  s.alpha = qn2 > 0.0 ? s.state.omega.dot(s.q) / qn2 : 0.0;
  const double scale = std::sqrt(qn2);
  const auto& l = model.params().lambda;
  const bool planar1 = std::abs(s.q[0]) <= tol * scale;
  const bool planar2 = std::abs(s.q[1]) <= tol * scale;
  if (planar1 && planar2) {
    s.family = Family::PR;
  } else if (moments_equal(l[0], l[1])) {
    s.family = Family::SP;
  } else if (planar2) {
    s.family = Family::SP1;
  } else if (planar1) {
    s.family = Family::SP2;
  } else {
    // Off every family plane; pick the closer SP plane.
    s.family = std::abs(s.q[1]) < std::abs(s.q[0]) ? Family::SP1 : Family::SP2;
  }
  s.residual = model.rhs(u).norm();
  return s;
}

NewtonResult newton_refine(const SystemState& guess, const RigidFluidModel& model,
                           const NewtonOptions& options) {
  NewtonResult res;
  const int d = model.dim();
  const Eigen::VectorXd u0 = pack(guess);
  if (u0.size() != d) throw std::invalid_argument("newton_refine: guess does not match basis size");
  Eigen::VectorXd u = u0;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd0(model.forcing_jacobian(u0), Eigen::ComputeFullV);
  const Eigen::MatrixXd border = svd0.matrixV().rightCols(2);

  Eigen::MatrixXd bordered = Eigen::MatrixXd::Zero(d + 2, d + 2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 2);
  res.residual = model.rhs(u).norm();
  while (res.residual > options.tolerance && res.iterations < options.max_iter) {
    bordered.topLeftCorner(d, d) = model.forcing_jacobian(u);
    bordered.topRightCorner(d, 2) = border;
    bordered.bottomLeftCorner(2, d) = border.transpose();
    rhs.head(d) = -model.forcing(u);
    const Eigen::VectorXd step = bordered.fullPivLu().solve(rhs);
    u += step.head(d);
    ++res.iterations;
    res.residual = model.rhs(u).norm();
    if (!std::isfinite(res.residual)) {
      res.message = "iteration diverged";
      return res;
    }
    if ((u - u0).norm() > options.max_displacement) {
      res.message = "iterate left the admissible neighbourhood of the guess";
      return res;
    }
  }
  if (res.residual > options.tolerance) {
    res.message = "no convergence within " + std::to_string(options.max_iter) + " iterations";
    return res;
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(model.forcing_jacobian(u)).singularValues();
  if (d >= 3 && sv[d - 3] <= options.rank_tol * sv[0]) {
    res.rank_deficient = true;
    res.message = "Jacobian kernel exceeds two dimensions";
    return res;
  }
  res.converged = true;
  res.steady = identify_steady(u, model);
  return res;
}

bool DataConditionFlags::passed() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const Condition& c) { return c.passed; });
}

DataConditionFlags data_condition_flags(double k, const BodyParams& params, double margin) {
  DataConditionFlags flags;
  flags.k = k;
  flags.zero_spin = k == 0.0;
  const auto& l = params.lambda;
  const double b2 = params.beta2;
  auto add = [&](std::string name, double value, double target) {
    flags.conditions.push_back({std::move(name), value, target, std::abs(value - target) > margin * std::abs(target)});
  };
  for (int i = 0; i < 2; ++i) {
    const double gap = l[2] - l[i];
    const std::string idx = std::to_string(i + 1);
    add("spin_squared_" + idx, gap / (l[2] * l[2]) * k * k, b2);
    add("spin_linear_" + idx, gap * k, 4.0 * b2 * b2);
  }
  return flags;
}

DataConditionFlags data_condition_flags(const SystemState& s0, const RigidFluidModel& model, double margin) {
  DataConditionFlags flags = data_condition_flags(model.momentum(pack(s0)), model.params(), margin);
  flags.unit_gamma = std::abs(s0.gamma.norm() - 1.0) <= 1e-12;
  return flags;
}

}  // namespace fluidtop
