#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace fluidtop {

/// dy/dt = f(y); autonomous systems only.
using OdeRhs = std::function<void(Eigen::Ref<const Eigen::VectorXd> y, Eigen::Ref<Eigen::VectorXd> dydt)>;

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 1e-3;
  double max_step = 0.0;        ///< <= 0: unbounded
  double blowup_norm = 1e12;    ///< |y| beyond this is reported as blow-up
};

struct IntegrationStats {
  std::size_t steps = 0;
  std::size_t rhs_evals = 0;
  bool blowup = false;
  /// Time at which the solution left the admissible region (candidate blow-up time).
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

struct OdeSolution {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  IntegrationStats stats;
};

/// Adaptive Dormand-Prince 5(4) with dense output at the requested times.
/// sample_times must be non-decreasing; the first entry is the initial time.
/// On blow-up or step-size failure the solution is truncated at the last
/// sample reached and stats.blowup is set.
[[nodiscard]] OdeSolution integrate_ode(const OdeRhs& rhs, const Eigen::VectorXd& y0,
                                        std::span<const double> sample_times,
                                        const IntegratorOptions& options = {});

/// {0, t_end/intervals, ..., t_end}; a single {0} when t_end == 0.
[[nodiscard]] std::vector<double> uniform_times(double t_end, std::size_t intervals);

}  // namespace fluidtop
