#include "dapspp/dapspp.h"

#include <cstring>
#include <memory>
#include <string>

#include "core/common.hpp"
#include "core/config.hpp"
#include "core/log.hpp"
#include "core/operators.hpp"
#include "core/prior.hpp"
#include "core/rng.hpp"
#include "core/runner.hpp"
#include "core/schedule.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Maps core exceptions onto the status codes the header documents.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DAPSPP_OK;
  } catch (const dapspp::ConfigError& e) {
    set_error(e.what());
    return DAPSPP_ERR_CONFIG;
  } catch (const dapspp::NumericalError& e) {
    set_error(e.what());
    return DAPSPP_ERR_NUMERIC;
  } catch (const std::exception& e) {
    set_error(e.what());
    return DAPSPP_ERR_INVALID;
  }
}

dapspp::Vec to_vec(const double* x, int64_t dim) {
  dapspp::Vec v(static_cast<Eigen::Index>(dim));
  std::memcpy(v.data(), x, sizeof(double) * static_cast<std::size_t>(dim));
  return v;
}

void from_vec(const dapspp::Vec& v, double* out) {
  std::memcpy(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

}  // namespace

struct dapspp_model {
  std::unique_ptr<dapspp::ScoreModel> model;
};

struct dapspp_operator {
  std::shared_ptr<const dapspp::ForwardOperator> op;
};

extern "C" {

const char* dapspp_version(void) { return "1.0.0"; }

const char* dapspp_last_error(void) { return g_last_error.c_str(); }

int dapspp_set_log_level(const char* level) {
  if (!level || !dapspp::set_log_level(std::string(level))) {
    set_error("log level must be 'error', 'info' or 'debug'");
    return DAPSPP_ERR_INVALID;
  }
  return DAPSPP_OK;
}

dapspp_model* dapspp_model_create(const char* json_spec) {
  if (!json_spec) {
    set_error("model spec is null");
    return nullptr;
  }
  dapspp_model* handle = nullptr;
  int rc = guarded([&]() {
    handle = new dapspp_model{dapspp::build_prior(dapspp::parse_prior_spec(json_spec))};
  });
  return rc == DAPSPP_OK ? handle : nullptr;
}

void dapspp_model_free(dapspp_model* model) { delete model; }

int64_t dapspp_model_dim(const dapspp_model* model) {
  return model ? static_cast<int64_t>(model->model->dim()) : -1;
}

int dapspp_model_score(const dapspp_model* model, const double* x, int64_t dim, double sigma,
                       double* out) {
  if (!model || !x || !out) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() { from_vec(model->model->score(to_vec(x, dim), sigma), out); });
}

int dapspp_model_log_density(const dapspp_model* model, const double* x, int64_t dim,
                             double sigma, double* out) {
  if (!model || !x || !out) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() { *out = model->model->log_density(to_vec(x, dim), sigma); });
}

int dapspp_model_tweedie(const dapspp_model* model, const double* x, int64_t dim, double sigma,
                         double* out) {
  if (!model || !x || !out) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded(
      [&]() { from_vec(dapspp::tweedie_denoise(*model->model, to_vec(x, dim), sigma), out); });
}

int dapspp_model_sample(const dapspp_model* model, uint64_t seed, double* out) {
  if (!model || !out) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() {
    dapspp::Rng rng = dapspp::Rng::derive(seed, "capi_sample");
    from_vec(model->model->sample(rng), out);
  });
}

dapspp_operator* dapspp_operator_create(const char* json_spec) {
  if (!json_spec) {
    set_error("operator spec is null");
    return nullptr;
  }
  dapspp_operator* handle = nullptr;
  int rc = guarded([&]() {
    handle = new dapspp_operator{dapspp::build_operator(dapspp::parse_operator_spec(json_spec))};
  });
  return rc == DAPSPP_OK ? handle : nullptr;
}

void dapspp_operator_free(dapspp_operator* op) { delete op; }

int64_t dapspp_operator_input_dim(const dapspp_operator* op) {
  return op ? static_cast<int64_t>(op->op->input_dim()) : -1;
}

int64_t dapspp_operator_output_dim(const dapspp_operator* op) {
  return op ? static_cast<int64_t>(op->op->output_dim()) : -1;
}

int dapspp_operator_is_linear(const dapspp_operator* op) {
  return op && op->op->linear() ? 1 : 0;
}

int dapspp_operator_apply(const dapspp_operator* op, const double* x, int64_t dim, double* y) {
  if (!op || !x || !y) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() { from_vec(op->op->apply(to_vec(x, dim)), y); });
}

int dapspp_operator_vjp(const dapspp_operator* op, const double* x, int64_t dim, const double* r,
                        int64_t out_dim, double* grad) {
  if (!op || !x || !r || !grad) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() { from_vec(op->op->vjp(to_vec(x, dim), to_vec(r, out_dim)), grad); });
}

int dapspp_operator_min_nonzero_singular(const dapspp_operator* op, double* out) {
  if (!op || !out) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() { *out = dapspp::min_nonzero_singular(*op->op); });
}

int dapspp_schedule_build(double sigma_max, double sigma_min, int n_steps, double rho,
                          double* out) {
  if (!out) {
    set_error("null output buffer");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() {
    std::vector<double> s = dapspp::build_schedule(sigma_max, sigma_min, n_steps, rho);
    std::memcpy(out, s.data(), sizeof(double) * s.size());
  });
}

int dapspp_step_size(double eta0, double delta, double t, double t_total, double* out) {
  if (!out) {
    set_error("null output buffer");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() { *out = dapspp::step_size({eta0, delta}, t, t_total); });
}

int dapspp_run(const char* config_path, const char* out_dir, const char* seeds_csv, int threads) {
  if (!config_path) {
    set_error("config path is null");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() {
    dapspp::run_command(config_path, out_dir ? out_dir : "", seeds_csv ? seeds_csv : "", threads);
  });
}

int dapspp_sweep(const char* config_path, const char* param, const double* values,
                 size_t n_values, const char* out_dir, const char* seeds_csv, int threads) {
  if (!config_path || !param || (!values && n_values > 0)) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() {
    std::vector<double> v(values, values + n_values);
    dapspp::sweep_command(config_path, param, v, out_dir ? out_dir : "",
                          seeds_csv ? seeds_csv : "", threads);
  });
}

int dapspp_diagnose(const char* config_path, const char* out_dir, const char* seeds_csv) {
  if (!config_path) {
    set_error("config path is null");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() {
    dapspp::diagnose_command(config_path, out_dir ? out_dir : "", seeds_csv ? seeds_csv : "");
  });
}

int dapspp_oracle_check(const char* config_path, const char* seeds_csv, char* report,
                        size_t report_len) {
  if (!config_path || !report || report_len == 0) {
    set_error("null argument");
    return DAPSPP_ERR_INVALID;
  }
  return guarded([&]() {
    std::string text =
        dapspp::oracle_check_command(config_path, seeds_csv ? seeds_csv : "");
    std::size_t n = std::min(report_len - 1, text.size());
    std::memcpy(report, text.data(), n);
    report[n] = '\0';
  });
}

}  // extern "C"
