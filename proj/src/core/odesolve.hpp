#pragma once

#include <functional>
#include <string>

#include "core/common.hpp"
#include "core/prior.hpp"

namespace dapspp {

struct OdeState {
  Vec x;
  double sigma = 0.0;
};

// Right-hand side dx/dsigma of the probability-flow ODE in the sigma(t) = t
// parameterization. Steppers integrate toward decreasing sigma.
using DriftFn = std::function<Vec(const Vec&, double)>;

// f(x, sigma) = -sigma * score(x, sigma).
Vec drift(const ScoreModel& model, const Vec& x, double sigma);

// One step from sigma to sigma - h. The model overloads consume exactly one
// (Euler) or four (RK4) score evaluations.
OdeState euler_step(const DriftFn& f, const OdeState& state, double h);
OdeState rk4_step(const DriftFn& f, const OdeState& state, double h);
OdeState euler_step(const ScoreModel& model, const OdeState& state, double h);
OdeState rk4_step(const ScoreModel& model, const OdeState& state, double h);

enum class OdeMethod { Euler, Rk4 };
OdeMethod ode_method_from_string(const std::string& s);
std::string to_string(OdeMethod m);

struct OdeResult {
  Vec x;
  long score_evals = 0;
};

// Integrates on a uniform sigma grid from sigma_start down to
// max(sigma_end, sigma_floor) and reports the score evaluations consumed.
OdeResult integrate_pf_ode(const ScoreModel& model, const Vec& x_start, double sigma_start,
                           double sigma_end, int n_steps, OdeMethod method,
                           double sigma_floor = 1e-3);

}  // namespace dapspp
