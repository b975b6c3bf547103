#include "fluidtop/ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <stdexcept>

namespace fluidtop {

namespace odeint = boost::numeric::odeint;

std::vector<double> uniform_times(double t_end, std::size_t intervals) {
  if (t_end < 0.0) throw std::invalid_argument("uniform_times: t_end must be non-negative");
  if (t_end == 0.0 || intervals == 0) return {0.0};
  std::vector<double> t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    t[i] = t_end * static_cast<double>(i) / static_cast<double>(intervals);
  }
  t.back() = t_end;
  return t;
}

OdeSolution integrate_ode(const OdeRhs& rhs, const Eigen::VectorXd& y0,
                          std::span<const double> sample_times, const IntegratorOptions& options) {
  if (sample_times.empty()) throw std::invalid_argument("integrate_ode: no sample times");
  for (std::size_t i = 1; i < sample_times.size(); ++i) {
    if (sample_times[i] < sample_times[i - 1]) {
      throw std::invalid_argument("integrate_ode: sample times must be non-decreasing");
    }
  }

  using State = std::vector<double>;
  OdeSolution sol;
  sol.times.reserve(sample_times.size());
  sol.states.reserve(sample_times.size());

  const double t0 = sample_times.front();
  const double t_end = sample_times.back();
  sol.times.push_back(t0);
  sol.states.push_back(y0);
  std::size_t next = 1;
  while (next < sample_times.size() && sample_times[next] == t0) {
    sol.times.push_back(t0);
    sol.states.push_back(y0);
    ++next;
  }
  if (next == sample_times.size()) return sol;

  const auto n = static_cast<Eigen::Index>(y0.size());
  std::size_t evals = 0;
  auto system = [&](const State& y, State& dydt, double /*t*/) {
    ++evals;
    Eigen::Map<const Eigen::VectorXd> ym(y.data(), n);
    Eigen::Map<Eigen::VectorXd> dm(dydt.data(), n);
    rhs(ym, dm);
  };

  auto stepper = options.max_step > 0.0
                     ? odeint::make_dense_output(options.abs_tol, options.rel_tol, options.max_step,
                                                 odeint::runge_kutta_dopri5<State>())
                     : odeint::make_dense_output(options.abs_tol, options.rel_tol,
                                                 odeint::runge_kutta_dopri5<State>());
  State y(y0.data(), y0.data() + y0.size());
  const double dt0 = std::min(options.initial_step, t_end - t0);
  stepper.initialize(y, t0, dt0);

  State buf(y.size());
  try {
    while (next < sample_times.size()) {
      const auto [t_old, t_new] = stepper.do_step(system);
      ++sol.stats.steps;
      while (next < sample_times.size() && sample_times[next] <= t_new) {
        stepper.calc_state(sample_times[next], buf);
        sol.times.push_back(sample_times[next]);
        sol.states.emplace_back(Eigen::Map<const Eigen::VectorXd>(buf.data(), n));
        ++next;
      }
      const auto& cur = stepper.current_state();
      double norm2 = 0.0;
      for (double v : cur) norm2 += v * v;
      if (!std::isfinite(norm2) || std::sqrt(norm2) > options.blowup_norm) {
        sol.stats.blowup = true;
        sol.stats.blowup_time = t_new;
        sol.stats.message = "solution norm exceeded the blow-up threshold";
        break;
      }
      const double dt = stepper.current_time_step();
      if (next < sample_times.size() && dt < 1e-14 * std::max(1.0, std::abs(t_new))) {
        sol.stats.blowup = true;
        sol.stats.blowup_time = t_new;
        sol.stats.message = "step size underflow";
        break;
      }
      (void)t_old;
    }
  } catch (const odeint::odeint_error& e) {
    sol.stats.blowup = true;
    sol.stats.blowup_time = stepper.current_time();
    sol.stats.message = e.what();
  }
  sol.stats.rhs_evals = evals;
  return sol;
}

}  // namespace fluidtop
