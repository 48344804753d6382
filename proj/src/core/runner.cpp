#include "core/runner.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "core/arrayfile.hpp"
#include "core/csv.hpp"
#include "core/diagnostics.hpp"
#include "core/log.hpp"
#include "core/metrics.hpp"
#include "core/refine.hpp"

namespace dapspp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string dir_of(const std::string& path) {
  fs::path p(path);
  return p.has_parent_path() ? p.parent_path().string() : std::string(".");
}

RunConfig load_with_overrides(const std::string& config_path, const std::string& out_dir_override,
                              const std::string& seeds_csv) {
  RunConfig cfg = load_run_config(config_path);
  if (!out_dir_override.empty()) cfg.output_dir = out_dir_override;
  if (!seeds_csv.empty()) cfg.seeds = parse_seed_list(seeds_csv);
  if (cfg.seeds.empty()) throw ConfigError("config field 'seeds' must be nonempty");
  return cfg;
}

void for_each_seed(const std::vector<std::uint64_t>& seeds, int threads,
                   const std::function<void(std::size_t)>& body) {
  const int n_workers =
      std::max(1, std::min<int>(threads <= 0 ? 1 : threads, static_cast<int>(seeds.size())));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= seeds.size()) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

json summary_json(const RunOutcome& out) {
  json s;
  s["seed"] = out.seed;
  s["method"] = out.method;
  s["nfe"] = out.nfe;
  s["residual_norm"] = out.residual_norm;
  s["residual_ratio"] = out.residual_ratio;
  json metrics = json::object();
  if (out.mse_value) metrics["mse"] = *out.mse_value;
  if (out.psnr_value) {
    metrics["psnr"] = std::isinf(*out.psnr_value) ? json("inf") : json(*out.psnr_value);
  }
  if (out.ssim_value) metrics["ssim"] = *out.ssim_value;
  s["metrics"] = metrics;
  return s;
}

void write_seed_outputs(const fs::path& dir, const RunOutcome& out) {
  fs::create_directories(dir);
  write_trace_csv((dir / "trace.csv").string(), out.trace);
  write_dpx_vector((dir / "final.dpx").string(), out.final_x);
  std::ofstream os(dir / "summary.json");
  os << summary_json(out).dump(2) << '\n';
}

std::vector<RunOutcome> run_all_seeds(const RunConfig& cfg, const std::string& base_dir,
                                      int threads) {
  auto model = build_prior(cfg.prior);
  auto op = build_operator(cfg.op);
  MeasurementInstance inst = build_measurement(cfg, *model, op, base_dir);

  std::vector<RunOutcome> outcomes(cfg.seeds.size());
  for_each_seed(cfg.seeds, threads, [&](std::size_t i) {
    outcomes[i] = execute_seed(cfg, *model, inst, cfg.seeds[i]);
  });
  return outcomes;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string tok = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) {
      try {
        seeds.push_back(std::stoull(tok));
      } catch (const std::exception&) {
        throw ConfigError("invalid seed '" + tok + "' in seed list");
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

RunOutcome execute_seed(const RunConfig& cfg, const ScoreModel& model,
                        const MeasurementInstance& inst, std::uint64_t seed) {
  SamplerConfig sc = build_sampler_config(cfg, seed);

  SampleResult result;
  if (cfg.sampler.method == "dapspp") {
    result = run_dapspp(model, inst.meas, sc);
  } else if (cfg.sampler.method == "daps") {
    result = run_daps_baseline(model, inst.meas, sc);
  } else {
    result = run_dps_baseline(model, inst.meas, sc);
  }

  RunOutcome out;
  out.seed = seed;
  out.method = cfg.sampler.method;
  out.nfe = result.trace.total_nfe;
  out.residual_norm = residual(*inst.meas.op, result.x, inst.meas.y).norm();
  out.residual_ratio = out.residual_norm /
                       (inst.meas.gamma * std::sqrt(static_cast<double>(inst.meas.y.size())));
  if (inst.truth) {
    out.mse_value = mse(result.x, *inst.truth);
    out.psnr_value = psnr(result.x, *inst.truth, 1.0);
    if (cfg.op.rows > 1 && cfg.op.cols > 1 && cfg.op.rows * cfg.op.cols == model.dim()) {
      out.ssim_value = ssim(result.x, *inst.truth, cfg.op.rows, cfg.op.cols, 1.0);
    }
  }
  out.final_x = std::move(result.x);
  out.trace = std::move(result.trace);
  return out;
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  CsvWriter csv(path, {"phase", "cycle", "step", "sigma_in", "sigma_renoise", "eta", "nfe",
                       "residual_norm", "residual_ratio", "grad_norm", "kappa", "inner_product",
                       "score_norm_x0", "dps_equiv_diff"});
  for (const CycleRecord& c : trace.cycles) {
    csv.field(std::string("cycle"))
        .field(long(c.cycle))
        .empty_field()
        .field(c.sigma_in)
        .field(c.sigma_renoise)
        .field(c.eta)
        .field(c.nfe)
        .field(c.residual_norm)
        .field(c.residual_ratio)
        .empty_field()
        .field(c.kappa)
        .field(c.inner_product)
        .field(c.score_norm_x0)
        .field(c.dps_equiv_diff);
    csv.end_row();
  }
  for (const Trace::RefineRow& r : trace.refine_rows) {
    csv.field(std::string("mstep"))
        .field(long(r.cycle))
        .field(long(r.step))
        .empty_field()
        .empty_field()
        .empty_field()
        .empty_field()
        .field(r.residual_norm)
        .empty_field()
        .field(r.grad_norm)
        .empty_field()
        .empty_field()
        .empty_field()
        .empty_field();
    csv.end_row();
  }
}

void write_schedule_csv(const std::string& path, const std::vector<double>& sigmas) {
  CsvWriter csv(path, {"index", "sigma"});
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    csv.field(static_cast<long>(i)).field(sigmas[i]);
    csv.end_row();
  }
}

void run_command(const std::string& config_path, const std::string& out_dir_override,
                 const std::string& seeds_csv, int threads) {
  RunConfig cfg = load_with_overrides(config_path, out_dir_override, seeds_csv);
  const std::string base_dir = dir_of(config_path);
  log_info("run: " + std::to_string(cfg.seeds.size()) + " seed(s) -> " + cfg.output_dir);

  fs::create_directories(cfg.output_dir);
  {
    std::ofstream os(fs::path(cfg.output_dir) / "config.json");
    os << serialize_run_config(cfg) << '\n';
  }
  write_schedule_csv((fs::path(cfg.output_dir) / "schedule.csv").string(),
                     build_sampler_config(cfg, cfg.seeds.front()).schedule.build());

  std::vector<RunOutcome> outcomes = run_all_seeds(cfg, base_dir, threads);
  json agg = json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    write_seed_outputs(fs::path(cfg.output_dir) / ("seed_" + std::to_string(cfg.seeds[i])),
                       outcomes[i]);
    agg.push_back(summary_json(outcomes[i]));
  }
  std::ofstream os(fs::path(cfg.output_dir) / "summary.json");
  os << json{{"runs", agg}}.dump(2) << '\n';
  log_info("run: done");
}

void sweep_command(const std::string& config_path, const std::string& param,
                   const std::vector<double>& values, const std::string& out_dir_override,
                   const std::string& seeds_csv, int threads) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  if (param != "sigma_bar" && param != "rho" && param != "gamma" && param != "J" && param != "K")
    throw ConfigError("sweep: unknown parameter '" + param + "'");

  RunConfig base = load_with_overrides(config_path, out_dir_override, seeds_csv);
  const std::string base_dir = dir_of(config_path);
  fs::create_directories(base.output_dir);

  CsvWriter csv((fs::path(base.output_dir) / "sweep.csv").string(),
                {"param", "value", "seed", "nfe", "residual_norm", "residual_ratio", "mse",
                 "psnr", "ssim"});
  for (double v : values) {
    RunConfig cfg = base;
    if (param == "sigma_bar") {
      cfg.sampler.sigma_bar = v;
    } else if (param == "rho") {
      cfg.sampler.rho = v;
    } else if (param == "gamma") {
      cfg.measurement.gamma = v;
    } else if (param == "J") {
      cfg.sampler.refine_steps = static_cast<int>(v);
    } else {
      cfg.sampler.n_anneal = static_cast<int>(v);
    }
    std::string tag = param + "_" + format_double(v);
    cfg.output_dir = (fs::path(base.output_dir) / tag).string();
    // Re-validate the derived configuration before running it.
    RunConfig checked = parse_run_config(serialize_run_config(cfg));
    checked.output_dir = cfg.output_dir;

    fs::create_directories(checked.output_dir);
    std::vector<RunOutcome> outcomes = run_all_seeds(checked, base_dir, threads);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      write_seed_outputs(fs::path(checked.output_dir) /
                             ("seed_" + std::to_string(checked.seeds[i])),
                         outcomes[i]);
      const RunOutcome& o = outcomes[i];
      csv.field(param).field(v).field(static_cast<long>(o.seed)).field(o.nfe)
          .field(o.residual_norm).field(o.residual_ratio);
      if (o.mse_value) csv.field(*o.mse_value); else csv.empty_field();
      if (o.psnr_value) csv.field(*o.psnr_value); else csv.empty_field();
      if (o.ssim_value) csv.field(*o.ssim_value); else csv.empty_field();
      csv.end_row();
    }
  }
  log_info("sweep: done");
}

void diagnose_command(const std::string& config_path, const std::string& out_dir_override,
                      const std::string& seeds_csv) {
  RunConfig cfg = load_with_overrides(config_path, out_dir_override, seeds_csv);
  const std::string base_dir = dir_of(config_path);
  fs::create_directories(cfg.output_dir);

  auto model = build_prior(cfg.prior);
  auto op = build_operator(cfg.op);
  MeasurementInstance inst = build_measurement(cfg, *model, op, base_dir);

  const std::uint64_t seed = cfg.seeds.front();
  SamplerConfig sc = build_sampler_config(cfg, seed);
  sc.trace_diagnostics = true;
  sc.trace_dps_equivalence = true;
  SampleResult result = run_dapspp(*model, inst.meas, sc);

  {
    CsvWriter csv((fs::path(cfg.output_dir) / "diagnostics.csv").string(),
                  {"cycle", "sigma", "eta", "nfe", "residual_norm", "residual_ratio", "kappa",
                   "inner_product", "score_norm_x0", "dps_equiv_max_abs_diff"});
    for (const CycleRecord& c : result.trace.cycles) {
      csv.field(long(c.cycle))
          .field(c.sigma_in)
          .field(c.eta)
          .field(c.nfe)
          .field(c.residual_norm)
          .field(c.residual_ratio)
          .field(c.kappa)
          .field(c.inner_product)
          .field(c.score_norm_x0)
          .field(c.dps_equiv_diff);
      csv.end_row();
    }
  }

  const WarmStartInit inits[] = {WarmStartInit::Tweedie, WarmStartInit::Euler5,
                                 WarmStartInit::Rk45, WarmStartInit::PureNoise};
  RefineConfig rcfg;
  rcfg.steps = std::max(200, cfg.sampler.refine_steps);
  rcfg.eta = cfg.sampler.eta0;
  rcfg.with_prior = false;
  rcfg.grad_convention = grad_convention_from_string(cfg.sampler.grad_convention);
  rcfg.sigma_ref = cfg.sampler.sigma_min;
  auto table = warm_start_compare(inst.meas, *model, inits, rcfg, cfg.sampler.sigma_max,
                                  cfg.sampler.gamma_eff, seed);
  CsvWriter csv((fs::path(cfg.output_dir) / "warmstart.csv").string(),
                {"init", "iters_to_threshold", "final_residual", "threshold"});
  for (const WarmStartRow& row : table) {
    csv.field(row.init)
        .field(static_cast<long>(row.iters_to_threshold))
        .field(row.final_residual)
        .field(row.threshold);
    csv.end_row();
  }
  log_info("diagnose: done");
}

std::string oracle_check_command(const std::string& config_path, const std::string& seeds_csv) {
  RunConfig cfg = load_with_overrides(config_path, "", seeds_csv);
  const std::string base_dir = dir_of(config_path);

  auto model = build_prior(cfg.prior);
  auto op = build_operator(cfg.op);
  if (!op->linear()) throw ConfigError("oracle-check requires a linear operator");
  MeasurementInstance inst = build_measurement(cfg, *model, op, base_dir);

  // Conjugate oracle needs the mixture form; the isotropic prior is its
  // one-component special case.
  std::unique_ptr<GmmPrior> gmm;
  if (const auto* g = dynamic_cast<const GmmPrior*>(model.get())) {
    gmm = std::make_unique<GmmPrior>(*g);
  } else if (const auto* iso = dynamic_cast<const IsotropicGaussianPrior*>(model.get())) {
    gmm = std::make_unique<GmmPrior>(GmmPrior::single(
        iso->mu(), iso->tau2() * Mat::Identity(iso->dim(), iso->dim())));
  } else {
    throw ConfigError("oracle-check requires a Gaussian or mixture prior");
  }
  PosteriorOracle oracle = gmm_posterior_oracle(*gmm, *op, inst.meas.y, inst.meas.gamma);

  Mat samples(static_cast<Eigen::Index>(cfg.seeds.size()), model->dim());
  for_each_seed(cfg.seeds, 1, [&](std::size_t i) {
    RunOutcome out = execute_seed(cfg, *model, inst, cfg.seeds[i]);
    samples.row(static_cast<Eigen::Index>(i)) = out.final_x.transpose();
  });

  std::string report;
  if (samples.rows() >= 2) {
    MomentError err = moment_error(samples, oracle);
    Vec emp_mean = samples.colwise().mean();
    report += "samples: " + std::to_string(samples.rows()) + "\n";
    report += "oracle mean:    ";
    for (Eigen::Index i = 0; i < oracle.mean().size(); ++i)
      report += format_double(oracle.mean()[i]) + " ";
    report += "\nempirical mean: ";
    for (Eigen::Index i = 0; i < emp_mean.size(); ++i) report += format_double(emp_mean[i]) + " ";
    report += "\nmean_err:   " + format_double(err.mean_err);
    report += "\ncov_err:    " + format_double(err.cov_err);
    report += "\nweight_err: " + format_double(err.weight_err);
    report += "\n";
  } else {
    report = "oracle-check needs at least two seeds for moment comparison\n";
  }
  return report;
}

}  // namespace dapspp
