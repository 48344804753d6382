#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/sampler.hpp"

namespace dapspp {

struct RunOutcome {
  std::uint64_t seed = 0;
  std::string method;
  long nfe = 0;
  double residual_norm = 0.0;
  double residual_ratio = 0.0;
  std::optional<double> mse_value;
  std::optional<double> psnr_value;
  std::optional<double> ssim_value;
  Vec final_x;
  Trace trace;
};

// One sampler execution for one seed against a shared measurement instance.
RunOutcome execute_seed(const RunConfig& cfg, const ScoreModel& model,
                        const MeasurementInstance& inst, std::uint64_t seed);

std::vector<std::uint64_t> parse_seed_list(const std::string& csv);

// Entry points behind the C API; they throw ConfigError / NumericalError,
// which the boundary maps onto status codes.
void run_command(const std::string& config_path, const std::string& out_dir_override,
                 const std::string& seeds_csv, int threads);
void sweep_command(const std::string& config_path, const std::string& param,
                   const std::vector<double>& values, const std::string& out_dir_override,
                   const std::string& seeds_csv, int threads);
void diagnose_command(const std::string& config_path, const std::string& out_dir_override,
                      const std::string& seeds_csv);
std::string oracle_check_command(const std::string& config_path, const std::string& seeds_csv);

void write_trace_csv(const std::string& path, const Trace& trace);
void write_schedule_csv(const std::string& path, const std::vector<double>& sigmas);

}  // namespace dapspp
