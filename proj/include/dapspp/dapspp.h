#ifndef DAPSPP_DAPSPP_H
#define DAPSPP_DAPSPP_H

/*
 * C API for the dapspp sampler library.
 *
 * All functions return a status code (DAPSPP_OK on success) unless noted;
 * dapspp_last_error() describes the most recent failure on the calling
 * thread. Handles are opaque and must be released with the matching _free
 * function. Specs are JSON objects using the same sub-schemas as the run
 * config file ("prior" and "operator" sections).
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define DAPSPP_OK 0
#define DAPSPP_ERR_INVALID 1 /* bad argument or runtime failure */
#define DAPSPP_ERR_CONFIG 2  /* config parse/validation error   */
#define DAPSPP_ERR_NUMERIC 3 /* sampler state became non-finite */

const char* dapspp_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* dapspp_last_error(void);

/* Log verbosity: "error", "info" or "debug" (also via env DAPSPP_LOG). */
int dapspp_set_log_level(const char* level);

/* ---- score models ---- */

typedef struct dapspp_model dapspp_model;

dapspp_model* dapspp_model_create(const char* json_spec);
void dapspp_model_free(dapspp_model* model);
int64_t dapspp_model_dim(const dapspp_model* model);
int dapspp_model_score(const dapspp_model* model, const double* x, int64_t dim, double sigma,
                       double* out);
int dapspp_model_log_density(const dapspp_model* model, const double* x, int64_t dim,
                             double sigma, double* out);
int dapspp_model_tweedie(const dapspp_model* model, const double* x, int64_t dim, double sigma,
                         double* out);
int dapspp_model_sample(const dapspp_model* model, uint64_t seed, double* out);

/* ---- forward operators ---- */

typedef struct dapspp_operator dapspp_operator;

dapspp_operator* dapspp_operator_create(const char* json_spec);
void dapspp_operator_free(dapspp_operator* op);
int64_t dapspp_operator_input_dim(const dapspp_operator* op);
int64_t dapspp_operator_output_dim(const dapspp_operator* op);
int dapspp_operator_is_linear(const dapspp_operator* op);
int dapspp_operator_apply(const dapspp_operator* op, const double* x, int64_t dim, double* y);
int dapspp_operator_vjp(const dapspp_operator* op, const double* x, int64_t dim, const double* r,
                        int64_t out_dim, double* grad);
int dapspp_operator_min_nonzero_singular(const dapspp_operator* op, double* out);

/* ---- schedules ---- */

/* Writes n_steps annealed noise levels into out. */
int dapspp_schedule_build(double sigma_max, double sigma_min, int n_steps, double rho,
                          double* out);
int dapspp_step_size(double eta0, double delta, double t, double t_total, double* out);

/* ---- experiment entry points (used by the CLI) ---- */

/*
 * Each takes a run-config path. out_dir overrides the config's output_dir
 * when non-NULL; seeds_csv (e.g. "1,2,3") overrides the seed list when
 * non-NULL; threads <= 0 means single-threaded. Returns DAPSPP_OK,
 * DAPSPP_ERR_CONFIG or DAPSPP_ERR_NUMERIC.
 */
int dapspp_run(const char* config_path, const char* out_dir, const char* seeds_csv, int threads);
int dapspp_sweep(const char* config_path, const char* param, const double* values,
                 size_t n_values, const char* out_dir, const char* seeds_csv, int threads);
int dapspp_diagnose(const char* config_path, const char* out_dir, const char* seeds_csv);

/* Writes a text report comparing sampler moments against the closed-form
 * posterior; report is truncated to report_len - 1 characters. */
int dapspp_oracle_check(const char* config_path, const char* seeds_csv, char* report,
                        size_t report_len);

#ifdef __cplusplus
}
#endif

#endif /* DAPSPP_DAPSPP_H */
