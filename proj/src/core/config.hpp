#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/operators.hpp"
#include "core/prior.hpp"
#include "core/sampler.hpp"

namespace dapspp {

struct PriorSpec {
  std::string type = "isotropic_gaussian";  // or "gmm"
  // isotropic_gaussian
  Eigen::Index dim = 256;
  Vec mean;  // resolved to a full vector at parse time
  double tau2 = 0.04;
  // gmm
  std::vector<double> weights;
  std::vector<Vec> means;
  std::vector<Mat> covariances;
};

struct OperatorSpec {
  std::string type = "conv2d";
  Eigen::Index rows = 16;
  Eigen::Index cols = 16;
  // mask_inpaint: explicit mask, or a hidden box [r0, c0, height, width]
  std::vector<int> mask;
  std::vector<Eigen::Index> hidden_box;
  // conv2d
  std::string kernel = "gaussian";  // gaussian | motion | custom
  int kernel_size = 7;
  double kernel_std = 1.5;
  Mat kernel_values;
  // downsample_avg
  Eigen::Index factor = 4;
  // hdr_clip
  double alpha = 2.0;
  // phase_magnitude
  Eigen::Index oversample = 2;
};

struct MeasurementSpec {
  double gamma = 0.05;
  std::uint64_t seed = 1234;  // shared across run seeds so all chains see one instance
  std::string truth = "prior_sample";  // or "file"
  std::string x_file;
  std::string source = "simulate";  // or "file"
  std::string y_file;
};

struct SamplerSpec {
  std::string method = "dapspp";  // dapspp | daps | dps
  int n_anneal = 50;              // E-M cycles; the schedule has n_anneal + 1 levels
  double sigma_max = 100.0;
  double sigma_min = 0.1;
  double rho = -7.0;
  double sigma_bar = 0.5;
  int ode_steps_below_bar = 1;
  std::string estep_method = "rk4";
  double sigma_floor = 1e-3;
  double eta0 = 1e-4;
  double delta = 1e-2;
  int refine_steps = 8;
  bool with_prior = false;
  std::string grad_convention = "paper_literal";
  double gamma_eff = 0.01;
  int daps_ode_steps = 2;
  int daps_refine_steps = 100;
  bool daps_with_prior = true;
  bool trace_diagnostics = true;
};

struct RunConfig {
  std::string task;  // preset name the config was resolved from, if any
  PriorSpec prior;
  OperatorSpec op;
  MeasurementSpec measurement;
  SamplerSpec sampler;
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "out";
};

const std::vector<std::string>& preset_names();
void apply_preset(const std::string& task, RunConfig& cfg);

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& cfg);
bool operator==(const RunConfig& a, const RunConfig& b);

// Standalone sub-schema parsers (used by the C API).
PriorSpec parse_prior_spec(const std::string& json_text);
OperatorSpec parse_operator_spec(const std::string& json_text);

std::unique_ptr<ScoreModel> build_prior(const PriorSpec& spec);
std::shared_ptr<const ForwardOperator> build_operator(const OperatorSpec& spec);

struct MeasurementInstance {
  Measurement meas;
  std::optional<Vec> truth;
};

// Simulates or loads the observation; base_dir anchors relative file paths.
MeasurementInstance build_measurement(const RunConfig& cfg, const ScoreModel& model,
                                      const std::shared_ptr<const ForwardOperator>& op,
                                      const std::string& base_dir);

SamplerConfig build_sampler_config(const RunConfig& cfg, std::uint64_t seed);

}  // namespace dapspp
