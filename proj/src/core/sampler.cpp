#include "core/sampler.hpp"

#include <cmath>
#include <limits>

#include "core/diagnostics.hpp"

namespace dapspp {

void SamplerConfig::validate() const {
  schedule.validate();
  step_sizes.validate();
  require(refine_steps >= 0, "sampler: refine_steps must be nonnegative");
  require(sigma_bar > schedule.sigma_min && sigma_bar < schedule.sigma_max,
          "sampler: sigma_bar must lie inside (sigma_min, sigma_max)");
  require(ode_steps_below_bar >= 1, "sampler: ode_steps_below_bar must be at least 1");
  require(sigma_floor > 0.0, "sampler: sigma_floor must be positive");
  require(gamma_eff > 0.0, "sampler: gamma_eff must be positive");
  require(daps_ode_steps >= 1, "sampler: daps_ode_steps must be at least 1");
  require(daps_refine_steps >= 0, "sampler: daps_refine_steps must be nonnegative");
}

EstepResult estep(const ScoreModel& model, const Vec& x_in, double sigma_in, double sigma_bar,
                  int ode_steps, OdeMethod method, double sigma_floor) {
  require(sigma_in > 0.0, "estep: sigma_in must be positive");
  if (sigma_in > sigma_bar) {
    return {tweedie_denoise(model, x_in, sigma_in), 1};
  }
  OdeResult r = integrate_pf_ode(model, x_in, sigma_in, 0.0, ode_steps, method, sigma_floor);
  return {std::move(r.x), r.score_evals};
}

Vec renoise(const Vec& x0, double sigma_next, Rng& rng) {
  require(sigma_next > 0.0, "renoise: sigma_next must be positive");
  return x0 + sigma_next * rng.normal_vec(x0.size());
}

namespace {

void ensure_finite(const Vec& v, int cycle, const char* what) {
  if (!v.allFinite()) {
    throw NumericalError(std::string(what) + " became non-finite at cycle " +
                         std::to_string(cycle));
  }
}

// Shared annealing loop; the E-step policy and refinement stage length are
// what distinguish the decoupled sampler from the interleaved baseline.
SampleResult run_annealed(const ScoreModel& model, const Measurement& meas,
                          const SamplerConfig& cfg, bool interleaved_baseline) {
  cfg.validate();
  meas.validate();
  require(model.dim() == meas.op->input_dim(), "sampler: model/operator dimension mismatch");

  const std::vector<double> sigmas = cfg.schedule.build();
  const int k_total = cfg.cycles();
  const double gamma_true = meas.gamma;
  const double root_m = std::sqrt(static_cast<double>(meas.op->output_dim()));
  const Measurement grad_meas{meas.y, cfg.gamma_eff, meas.op};

  Vec x = sigmas.front() * Rng::derive(cfg.seed, "init").normal_vec(model.dim());
  ensure_finite(x, 0, "initial state");

  Trace trace;
  trace.cycles.reserve(static_cast<std::size_t>(k_total));
  Vec x0_refined;
  long nfe = 0;

  for (int k = 1; k <= k_total; ++k) {
    const double sigma_in = sigmas[static_cast<std::size_t>(k - 1)];
    const double sigma_next = sigmas[static_cast<std::size_t>(k)];
    const double t = static_cast<double>(k_total - k) / static_cast<double>(k_total);
    const double eta_k = step_size(cfg.step_sizes, t, 1.0);

    CycleRecord rec;
    rec.cycle = k;
    rec.sigma_in = sigma_in;
    rec.eta = eta_k;

    if (cfg.trace_diagnostics) {
      rec.kappa = kappa(model, *meas.op, x, meas.y, cfg.gamma_eff, sigma_in).value;
      rec.inner_product = inner_product_At(model, *meas.op, x, meas.y, cfg.gamma_eff, sigma_in);
    }
    if (cfg.trace_dps_equivalence) {
      rec.dps_equiv_diff = dps_equivalence_check(model, grad_meas, x, sigma_in, sigma_next,
                                                 eta_k, mix_seed(cfg.seed, "equiv", k))
                               .max_abs_diff;
    }

    EstepResult e;
    if (interleaved_baseline) {
      OdeResult ode = integrate_pf_ode(model, x, sigma_in, 0.0, cfg.daps_ode_steps,
                                       OdeMethod::Euler, cfg.sigma_floor);
      e = {std::move(ode.x), ode.score_evals};
    } else {
      e = estep(model, x, sigma_in, cfg.sigma_bar, cfg.ode_steps_below_bar, cfg.estep_method,
                cfg.sigma_floor);
    }
    nfe += e.score_evals;
    ensure_finite(e.x0_hat, k, "E-step output");
    if (cfg.trace_diagnostics) {
      rec.score_norm_x0 = model.score(e.x0_hat, cfg.schedule.sigma_min).norm();
    }

    RefineConfig rcfg;
    rcfg.steps = interleaved_baseline ? cfg.daps_refine_steps : cfg.refine_steps;
    rcfg.eta = eta_k;
    rcfg.with_prior = interleaved_baseline ? cfg.daps_with_prior : cfg.with_prior;
    rcfg.grad_convention = cfg.grad_convention;
    rcfg.sigma_ref = cfg.schedule.sigma_min;

    Rng refine_rng = Rng::derive(cfg.seed, "refine", static_cast<std::uint64_t>(k));
    RefineResult refined = mcmc_refine(e.x0_hat, grad_meas, model, rcfg, refine_rng);
    ensure_finite(refined.x, k, "M-step output");
    x0_refined = std::move(refined.x);
    for (const RefineRecord& rr : refined.trace)
      trace.refine_rows.push_back({k, rr.step, rr.residual_norm, rr.grad_norm});

    rec.nfe = nfe;
    rec.residual_norm = residual(*meas.op, x0_refined, meas.y).norm();
    rec.residual_ratio = rec.residual_norm / (gamma_true * root_m);

    if (k < k_total) {
      Rng renoise_rng = Rng::derive(cfg.seed, "renoise", static_cast<std::uint64_t>(k));
      x = renoise(x0_refined, sigma_next, renoise_rng);
      ensure_finite(x, k, "re-noised state");
      rec.sigma_renoise = sigma_next;
    } else {
      rec.sigma_renoise = std::numeric_limits<double>::quiet_NaN();
    }
    trace.cycles.push_back(rec);
  }

  trace.total_nfe = nfe;
  return {std::move(x0_refined), std::move(trace)};
}

}  // namespace

SampleResult run_dapspp(const ScoreModel& model, const Measurement& meas,
                        const SamplerConfig& cfg) {
  return run_annealed(model, meas, cfg, false);
}

SampleResult run_daps_baseline(const ScoreModel& model, const Measurement& meas,
                               const SamplerConfig& cfg) {
  return run_annealed(model, meas, cfg, true);
}

SampleResult run_dps_baseline(const ScoreModel& model, const Measurement& meas,
                              const SamplerConfig& cfg) {
  cfg.validate();
  meas.validate();
  require(model.dim() == meas.op->input_dim(), "sampler: model/operator dimension mismatch");

  const std::vector<double> sigmas = cfg.schedule.build();
  const int k_total = cfg.cycles();
  const double gamma_true = meas.gamma;
  const double root_m = std::sqrt(static_cast<double>(meas.op->output_dim()));

  Vec x = sigmas.front() * Rng::derive(cfg.seed, "init").normal_vec(model.dim());
  Trace trace;
  long nfe = 0;

  for (int k = 1; k <= k_total; ++k) {
    const double sigma_t = sigmas[static_cast<std::size_t>(k - 1)];
    const double sigma_next = sigmas[static_cast<std::size_t>(k)];
    const double t = static_cast<double>(k_total - k) / static_cast<double>(k_total);
    const double eta_k = step_size(cfg.step_sizes, t, 1.0);

    Vec s = model.score(x, sigma_t);
    nfe += 1;
    Vec x0_hat = x + sigma_t * sigma_t * s;
    // Gradient of ||y - A(x0)||^2 evaluated at the denoised mean.
    Vec g = -2.0 * meas.op->vjp(x0_hat, residual(*meas.op, x0_hat, meas.y));
    Vec z = Rng::derive(cfg.seed, "dps", static_cast<std::uint64_t>(k)).normal_vec(model.dim());

    x = x + sigma_t * sigma_t * s + sigma_next * z - eta_k * g;
    ensure_finite(x, k, "coupled update");

    CycleRecord rec;
    rec.cycle = k;
    rec.sigma_in = sigma_t;
    rec.sigma_renoise = sigma_next;
    rec.eta = eta_k;
    rec.nfe = nfe;
    rec.residual_norm = residual(*meas.op, x0_hat, meas.y).norm();
    rec.residual_ratio = rec.residual_norm / (gamma_true * root_m);
    trace.cycles.push_back(rec);
  }

  // The loop leaves the state at sigma_min; report its denoised mean.
  Vec x0_final = tweedie_denoise(model, x, sigmas.back());
  nfe += 1;
  ensure_finite(x0_final, k_total, "final denoised state");
  trace.total_nfe = nfe;
  return {std::move(x0_final), std::move(trace)};
}

DpsEquivalence dps_equivalence_check(const ScoreModel& model, const Measurement& meas,
                                     const Vec& x_t, double sigma_t, double sigma_next,
                                     double eta_t, std::uint64_t seed) {
  meas.validate();
  require(sigma_t > 0.0, "dps_equivalence_check: sigma_t must be positive");
  require(sigma_next > 0.0, "dps_equivalence_check: sigma_next must be positive");

  const Vec z = Rng::derive(seed, "dps_equiv").normal_vec(x_t.size());
  Vec s = model.score(x_t, sigma_t);

  Vec x0_hat = x_t + sigma_t * sigma_t * s;
  Vec g = -2.0 * meas.op->vjp(x0_hat, residual(*meas.op, x0_hat, meas.y));

  DpsEquivalence out;
  out.coupled = x_t + sigma_t * sigma_t * s + sigma_next * z - eta_t * g;

  // Same algebra regrouped: E-step, one gradient-only M-step, re-noising.
  Vec e_step = tweedie_denoise(model, x_t, sigma_t);
  Vec m_step = e_step - eta_t * (-2.0 * meas.op->vjp(e_step, residual(*meas.op, e_step, meas.y)));
  out.decomposed = m_step + sigma_next * z;

  double scale = std::max(1.0, out.coupled.cwiseAbs().maxCoeff());
  out.max_abs_diff = (out.coupled - out.decomposed).cwiseAbs().maxCoeff() / scale;
  return out;
}

}  // namespace dapspp
