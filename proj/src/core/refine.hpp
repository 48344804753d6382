#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/operators.hpp"
#include "core/prior.hpp"
#include "core/rng.hpp"

namespace dapspp {

// Parameters of one likelihood-driven refinement stage.
struct RefineConfig {
  int steps = 8;           // J >= 0
  double eta = 1e-4;       // step size for this stage
  bool with_prior = false;
  GradConvention grad_convention = GradConvention::PaperLiteral;
  double sigma_ref = 0.1;  // noise level for the optional prior score term

  void validate() const;
};

// Deterministic part of the unadjusted Langevin update with an injected draw.
Vec ula_update(const Vec& x, const Vec& grad, double eta, const Vec& xi);
Vec ula_step(const Vec& x, const Vec& grad, double eta, Rng& rng);

struct RefineRecord {
  int step = 0;
  double residual_norm = 0.0;
  double grad_norm = 0.0;
};

struct RefineResult {
  Vec x;
  std::vector<RefineRecord> trace;
};

// J iterations of x <- x + eta*g + sqrt(2 eta)*xi, where g is the likelihood
// ascent direction (plus the prior score at sigma_ref when with_prior).
RefineResult mcmc_refine(const Vec& x0_hat, const Measurement& meas, const ScoreModel& model,
                         const RefineConfig& cfg, Rng& rng);

enum class WarmStartInit { Tweedie, Euler5, Rk45, PureNoise };
const char* to_string(WarmStartInit init);

struct WarmStartRow {
  std::string init;
  int iters_to_threshold = -1;  // -1 when the budget never crosses it
  double final_residual = 0.0;
  double threshold = 0.0;
};

// Runs the identical refinement from several initializations and reports when
// each first reaches residual <= 1.5 * gamma * sqrt(m). The gradient uses
// gamma_eff while the threshold uses the measurement's own gamma.
std::vector<WarmStartRow> warm_start_compare(const Measurement& meas, const ScoreModel& model,
                                             std::span<const WarmStartInit> inits,
                                             const RefineConfig& cfg, double sigma_max,
                                             double gamma_eff, std::uint64_t seed);

}  // namespace dapspp
