#pragma once

#include <cstdint>
#include <vector>

#include "core/common.hpp"
#include "core/odesolve.hpp"
#include "core/operators.hpp"
#include "core/prior.hpp"
#include "core/refine.hpp"
#include "core/rng.hpp"
#include "core/schedule.hpp"

namespace dapspp {

// Full parameterization of one sampler run. The annealing loop performs
// K = schedule.n_steps - 1 E-M cycles; cycle k starts at schedule[k-1] and
// re-noises to schedule[k].
struct SamplerConfig {
  NoiseSchedule schedule;
  StepSizeSchedule step_sizes;

  int refine_steps = 8;
  bool with_prior = false;
  GradConvention grad_convention = GradConvention::PaperLiteral;

  double sigma_bar = 0.5;         // E-step branch threshold
  int ode_steps_below_bar = 1;    // RK4 steps once sigma_in <= sigma_bar
  OdeMethod estep_method = OdeMethod::Rk4;
  double sigma_floor = 1e-3;

  // Effective noise level driving the likelihood gradient; the measurement's
  // own gamma is kept for residual-ratio diagnostics.
  double gamma_eff = 0.01;

  std::uint64_t seed = 0;

  // Interleaved baseline: Euler E-step at every level plus a long prior-aware
  // refinement stage.
  int daps_ode_steps = 2;
  int daps_refine_steps = 100;
  bool daps_with_prior = true;

  bool trace_diagnostics = true;
  bool trace_dps_equivalence = false;

  void validate() const;
  int cycles() const { return schedule.n_steps - 1; }
};

struct CycleRecord {
  int cycle = 0;
  double sigma_in = 0.0;       // level the E-step consumed
  double sigma_renoise = 0.0;  // NaN on the final cycle
  double eta = 0.0;
  long nfe = 0;                // cumulative score evaluations
  double residual_norm = 0.0;
  double residual_ratio = 0.0; // ||r|| / (gamma_true * sqrt(m))
  double kappa = 0.0;
  double inner_product = 0.0;
  double score_norm_x0 = 0.0;
  double dps_equiv_diff = 0.0;
};

struct Trace {
  struct RefineRow {
    int cycle = 0;
    int step = 0;
    double residual_norm = 0.0;
    double grad_norm = 0.0;
  };
  std::vector<CycleRecord> cycles;
  std::vector<RefineRow> refine_rows;
  long total_nfe = 0;
};

struct SampleResult {
  Vec x;
  Trace trace;
};

struct EstepResult {
  Vec x0_hat;
  long score_evals = 0;
};

// Tweedie denoising above sigma_bar, otherwise the configured RK4 descent to
// the sigma floor.
EstepResult estep(const ScoreModel& model, const Vec& x_in, double sigma_in, double sigma_bar,
                  int ode_steps, OdeMethod method, double sigma_floor);

Vec renoise(const Vec& x0, double sigma_next, Rng& rng);

SampleResult run_dapspp(const ScoreModel& model, const Measurement& meas,
                        const SamplerConfig& cfg);
SampleResult run_daps_baseline(const ScoreModel& model, const Measurement& meas,
                               const SamplerConfig& cfg);
SampleResult run_dps_baseline(const ScoreModel& model, const Measurement& meas,
                              const SamplerConfig& cfg);

struct DpsEquivalence {
  Vec coupled;
  Vec decomposed;
  double max_abs_diff = 0.0;  // relative to the coupled update's sup norm
};

// One coupled guidance update versus the same algebra regrouped as
// denoise -> gradient step -> renoise, sharing the Gaussian draw.
DpsEquivalence dps_equivalence_check(const ScoreModel& model, const Measurement& meas,
                                     const Vec& x_t, double sigma_t, double sigma_next,
                                     double eta_t, std::uint64_t seed);

}  // namespace dapspp
