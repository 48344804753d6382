#pragma once

#include <vector>

namespace dapspp {

// Annealed noise levels sigma_0 > ... > sigma_{N-1}, warped in sigma^(1/rho)
// space so that rho < 0 concentrates points in the small-noise regime.
struct NoiseSchedule {
  double sigma_max = 100.0;
  double sigma_min = 0.1;
  int n_steps = 51;   // number of emitted levels, >= 2
  double rho = -7.0;  // warp exponent, nonzero

  void validate() const;
  std::vector<double> build() const;
};

std::vector<double> build_schedule(double sigma_max, double sigma_min, int n_steps, double rho);

// Linear decay of the refinement step size: eta(t) = eta0*(delta + (t/T)(1-delta)),
// so eta(T) = eta0 and eta(0) = eta0*delta.
struct StepSizeSchedule {
  double eta0 = 1e-4;
  double delta = 1e-2;

  void validate() const;
};

double step_size(const StepSizeSchedule& sched, double t, double t_total);

double sigma_threshold(double gamma, double multiplier = 10.0);

}  // namespace dapspp
