#include "core/schedule.hpp"

#include <cmath>

#include "core/common.hpp"

namespace dapspp {

void NoiseSchedule::validate() const {
  require(sigma_min > 0.0, "schedule: sigma_min must be positive");
  require(sigma_max > sigma_min, "schedule: sigma_max must exceed sigma_min");
  require(n_steps >= 2, "schedule: n_steps must be at least 2");
  require(rho != 0.0, "schedule: rho must be nonzero");
}

std::vector<double> NoiseSchedule::build() const {
  validate();
  const double inv_rho = 1.0 / rho;
  const double u_max = std::pow(sigma_max, inv_rho);
  const double u_min = std::pow(sigma_min, inv_rho);
  std::vector<double> sigmas(static_cast<std::size_t>(n_steps));
  for (int i = 0; i < n_steps; ++i) {
    double frac = static_cast<double>(i) / static_cast<double>(n_steps - 1);
    sigmas[static_cast<std::size_t>(i)] = std::pow(u_max + frac * (u_min - u_max), rho);
  }
  // Endpoints are part of the contract; pin them against pow round-off.
  sigmas.front() = sigma_max;
  sigmas.back() = sigma_min;
  return sigmas;
}

std::vector<double> build_schedule(double sigma_max, double sigma_min, int n_steps, double rho) {
  return NoiseSchedule{sigma_max, sigma_min, n_steps, rho}.build();
}

void StepSizeSchedule::validate() const {
  require(eta0 > 0.0, "step sizes: eta0 must be positive");
  require(delta > 0.0 && delta <= 1.0, "step sizes: delta must lie in (0, 1]");
}

double step_size(const StepSizeSchedule& sched, double t, double t_total) {
  sched.validate();
  require(t_total > 0.0, "step_size: t_total must be positive");
  require(t >= 0.0 && t <= t_total, "step_size: t outside [0, t_total]");
  return sched.eta0 * (sched.delta + (t / t_total) * (1.0 - sched.delta));
}

double sigma_threshold(double gamma, double multiplier) {
  require(gamma > 0.0, "sigma_threshold: gamma must be positive");
  require(multiplier > 0.0, "sigma_threshold: multiplier must be positive");
  return multiplier * gamma;
}

}  // namespace dapspp
