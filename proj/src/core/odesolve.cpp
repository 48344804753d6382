#include "core/odesolve.hpp"

namespace dapspp {

Vec drift(const ScoreModel& model, const Vec& x, double sigma) {
  require(sigma > 0.0, "drift: sigma must be positive");
  return -sigma * model.score(x, sigma);
}

namespace {

void check_step(const OdeState& state, double h) {
  require(h > 0.0, "ode step: h must be positive");
  require(state.sigma - h >= 0.0, "ode step: step overshoots sigma = 0");
}

}  // namespace

OdeState euler_step(const DriftFn& f, const OdeState& state, double h) {
  check_step(state, h);
  return {state.x - h * f(state.x, state.sigma), state.sigma - h};
}

OdeState rk4_step(const DriftFn& f, const OdeState& state, double h) {
  check_step(state, h);
  const double s = state.sigma;
  // Classical four-stage update marched toward decreasing sigma; the two
  // midpoint stages sit at sigma - h/2.
  Vec k1 = f(state.x, s);
  Vec k2 = f(state.x - 0.5 * h * k1, s - 0.5 * h);
  Vec k3 = f(state.x - 0.5 * h * k2, s - 0.5 * h);
  Vec k4 = f(state.x - h * k3, s - h);
  return {state.x - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), s - h};
}

OdeState euler_step(const ScoreModel& model, const OdeState& state, double h) {
  return euler_step([&model](const Vec& x, double s) { return drift(model, x, s); }, state, h);
}

OdeState rk4_step(const ScoreModel& model, const OdeState& state, double h) {
  return rk4_step([&model](const Vec& x, double s) { return drift(model, x, s); }, state, h);
}

OdeMethod ode_method_from_string(const std::string& s) {
  if (s == "euler") return OdeMethod::Euler;
  if (s == "rk4") return OdeMethod::Rk4;
  throw ConfigError("unknown ODE method '" + s + "'");
}

std::string to_string(OdeMethod m) { return m == OdeMethod::Euler ? "euler" : "rk4"; }

OdeResult integrate_pf_ode(const ScoreModel& model, const Vec& x_start, double sigma_start,
                           double sigma_end, int n_steps, OdeMethod method, double sigma_floor) {
  require(n_steps >= 1, "integrate_pf_ode: need at least one step");
  require(sigma_floor > 0.0, "integrate_pf_ode: sigma_floor must be positive");
  require(sigma_end >= 0.0, "integrate_pf_ode: sigma_end must be nonnegative");
  const double target = std::max(sigma_end, sigma_floor);
  require(sigma_start > target, "integrate_pf_ode: sigma_start must exceed the end level");

  const double h = (sigma_start - target) / static_cast<double>(n_steps);
  OdeState state{x_start, sigma_start};
  long evals = 0;
  for (int i = 0; i < n_steps; ++i) {
    // Land exactly on the target at the last step regardless of round-off.
    double step = (i + 1 == n_steps) ? state.sigma - target : h;
    if (method == OdeMethod::Euler) {
      state = euler_step(model, state, step);
      evals += 1;
    } else {
      state = rk4_step(model, state, step);
      evals += 4;
    }
  }
  return {std::move(state.x), evals};
}

}  // namespace dapspp
