#include "core/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "core/arrayfile.hpp"
#include "core/rng.hpp"

namespace dapspp {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "' " + why);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad_field(path, "must be an integer");
  return j.get<int>();
}

Vec get_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad_field(path, "must be a nonempty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = get_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Mat get_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad_field(path, "must be a nonempty array of rows");
  std::size_t cols = 0;
  Mat m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Vec row = get_vector(j[i], path + "[" + std::to_string(i) + "]");
    if (i == 0) {
      cols = static_cast<std::size_t>(row.size());
      m.resize(static_cast<Eigen::Index>(j.size()), row.size());
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      bad_field(path, "rows must have equal length");
    }
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

json vector_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

void parse_prior(const json& j, PriorSpec& spec) {
  if (!j.is_object()) bad_field("prior", "must be an object");
  spec = PriorSpec{};
  spec.type = j.value("type", std::string("isotropic_gaussian"));
  if (spec.type == "isotropic_gaussian") {
    spec.dim = j.contains("dim") ? get_int(j.at("dim"), "prior.dim") : 256;
    if (spec.dim <= 0) bad_field("prior.dim", "must be positive");
    if (j.contains("mean")) {
      if (j.at("mean").is_number()) {
        spec.mean = Vec::Constant(spec.dim, j.at("mean").get<double>());
      } else {
        spec.mean = get_vector(j.at("mean"), "prior.mean");
        if (spec.mean.size() != spec.dim) bad_field("prior.mean", "must match prior.dim");
      }
    } else {
      spec.mean = Vec::Constant(spec.dim, 0.5);
    }
    spec.tau2 = j.contains("tau2") ? get_number(j.at("tau2"), "prior.tau2") : 0.04;
    if (spec.tau2 <= 0.0) bad_field("prior.tau2", "must be positive");
  } else if (spec.type == "gmm") {
    if (!j.contains("weights") || !j.contains("means") || !j.contains("covariances"))
      bad_field("prior", "gmm requires weights, means and covariances");
    Vec w = get_vector(j.at("weights"), "prior.weights");
    spec.weights.assign(w.data(), w.data() + w.size());
    const json& means = j.at("means");
    if (!means.is_array() || means.empty()) bad_field("prior.means", "must be a nonempty array");
    for (std::size_t k = 0; k < means.size(); ++k)
      spec.means.push_back(get_vector(means[k], "prior.means[" + std::to_string(k) + "]"));
    const json& covs = j.at("covariances");
    if (!covs.is_array() || covs.size() != means.size())
      bad_field("prior.covariances", "must match the number of means");
    for (std::size_t k = 0; k < covs.size(); ++k)
      spec.covariances.push_back(
          get_matrix(covs[k], "prior.covariances[" + std::to_string(k) + "]"));
    spec.dim = spec.means.front().size();
  } else {
    bad_field("prior.type", "must be 'isotropic_gaussian' or 'gmm'");
  }
}

void parse_operator(const json& j, OperatorSpec& spec) {
  if (!j.is_object()) bad_field("operator", "must be an object");
  spec = OperatorSpec{};
  spec.type = j.value("type", std::string("identity"));
  spec.rows = j.contains("rows") ? get_int(j.at("rows"), "operator.rows") : 16;
  spec.cols = j.contains("cols") ? get_int(j.at("cols"), "operator.cols") : 16;
  if (spec.rows <= 0) bad_field("operator.rows", "must be positive");
  if (spec.cols <= 0) bad_field("operator.cols", "must be positive");
  if (spec.type == "mask_inpaint") {
    if (j.contains("mask")) {
      const json& m = j.at("mask");
      if (!m.is_array() || m.empty()) bad_field("operator.mask", "must be a nonempty array");
      for (std::size_t i = 0; i < m.size(); ++i)
        spec.mask.push_back(get_int(m[i], "operator.mask[" + std::to_string(i) + "]"));
    } else if (j.contains("hidden_box")) {
      const json& b = j.at("hidden_box");
      if (!b.is_array() || b.size() != 4)
        bad_field("operator.hidden_box", "must be [row, col, height, width]");
      for (std::size_t i = 0; i < 4; ++i)
        spec.hidden_box.push_back(get_int(b[i], "operator.hidden_box"));
    } else {
      bad_field("operator", "mask_inpaint requires mask or hidden_box");
    }
  } else if (spec.type == "conv2d") {
    spec.kernel = j.value("kernel", std::string("gaussian"));
    spec.kernel_size = j.contains("kernel_size") ? get_int(j.at("kernel_size"), "operator.kernel_size") : 7;
    spec.kernel_std = j.contains("kernel_std") ? get_number(j.at("kernel_std"), "operator.kernel_std") : 1.5;
    if (spec.kernel == "custom") {
      if (!j.contains("kernel_values")) bad_field("operator.kernel_values", "required for custom kernels");
      spec.kernel_values = get_matrix(j.at("kernel_values"), "operator.kernel_values");
    } else if (spec.kernel != "gaussian" && spec.kernel != "motion") {
      bad_field("operator.kernel", "must be 'gaussian', 'motion' or 'custom'");
    }
  } else if (spec.type == "downsample_avg") {
    spec.factor = j.contains("factor") ? get_int(j.at("factor"), "operator.factor") : 4;
    if (spec.factor <= 0) bad_field("operator.factor", "must be positive");
  } else if (spec.type == "hdr_clip") {
    spec.alpha = j.contains("alpha") ? get_number(j.at("alpha"), "operator.alpha") : 2.0;
    if (spec.alpha <= 0.0) bad_field("operator.alpha", "must be positive");
  } else if (spec.type == "phase_magnitude") {
    spec.oversample = j.contains("oversample") ? get_int(j.at("oversample"), "operator.oversample") : 2;
    if (spec.oversample < 1) bad_field("operator.oversample", "must be at least 1");
  } else if (spec.type != "identity") {
    bad_field("operator.type", "unknown operator '" + spec.type + "'");
  }
}

void parse_measurement(const json& j, MeasurementSpec& spec) {
  if (!j.is_object()) bad_field("measurement", "must be an object");
  if (j.contains("gamma")) spec.gamma = get_number(j.at("gamma"), "measurement.gamma");
  if (spec.gamma <= 0.0) bad_field("measurement.gamma", "must be positive");
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("truth")) spec.truth = j.at("truth").get<std::string>();
  if (j.contains("x_file")) spec.x_file = j.at("x_file").get<std::string>();
  if (j.contains("source")) spec.source = j.at("source").get<std::string>();
  if (j.contains("y_file")) spec.y_file = j.at("y_file").get<std::string>();
  if (spec.truth != "prior_sample" && spec.truth != "file")
    bad_field("measurement.truth", "must be 'prior_sample' or 'file'");
  if (spec.source != "simulate" && spec.source != "file")
    bad_field("measurement.source", "must be 'simulate' or 'file'");
  if (spec.truth == "file" && spec.x_file.empty())
    bad_field("measurement.x_file", "required when truth is 'file'");
  if (spec.source == "file" && spec.y_file.empty())
    bad_field("measurement.y_file", "required when source is 'file'");
}

void parse_sampler(const json& j, SamplerSpec& spec) {
  if (!j.is_object()) bad_field("sampler", "must be an object");
  if (j.contains("method")) spec.method = j.at("method").get<std::string>();
  if (spec.method != "dapspp" && spec.method != "daps" && spec.method != "dps")
    bad_field("sampler.method", "must be 'dapspp', 'daps' or 'dps'");
  if (j.contains("n_anneal")) spec.n_anneal = get_int(j.at("n_anneal"), "sampler.n_anneal");
  if (spec.n_anneal < 1) bad_field("sampler.n_anneal", "must be at least 1");
  if (j.contains("sigma_max")) spec.sigma_max = get_number(j.at("sigma_max"), "sampler.sigma_max");
  if (j.contains("sigma_min")) spec.sigma_min = get_number(j.at("sigma_min"), "sampler.sigma_min");
  if (spec.sigma_min <= 0.0) bad_field("sampler.sigma_min", "must be positive");
  if (spec.sigma_max <= spec.sigma_min) bad_field("sampler.sigma_max", "must exceed sigma_min");
  if (j.contains("rho")) spec.rho = get_number(j.at("rho"), "sampler.rho");
  if (spec.rho == 0.0) bad_field("sampler.rho", "must be nonzero");
  if (j.contains("sigma_bar")) spec.sigma_bar = get_number(j.at("sigma_bar"), "sampler.sigma_bar");
  if (spec.sigma_bar <= spec.sigma_min || spec.sigma_bar >= spec.sigma_max)
    bad_field("sampler.sigma_bar", "must lie inside (sigma_min, sigma_max)");
  if (j.contains("ode_steps_below_bar"))
    spec.ode_steps_below_bar = get_int(j.at("ode_steps_below_bar"), "sampler.ode_steps_below_bar");
  if (spec.ode_steps_below_bar < 1) bad_field("sampler.ode_steps_below_bar", "must be at least 1");
  if (j.contains("estep_method")) spec.estep_method = j.at("estep_method").get<std::string>();
  if (spec.estep_method != "euler" && spec.estep_method != "rk4")
    bad_field("sampler.estep_method", "must be 'euler' or 'rk4'");
  if (j.contains("sigma_floor")) spec.sigma_floor = get_number(j.at("sigma_floor"), "sampler.sigma_floor");
  if (spec.sigma_floor <= 0.0) bad_field("sampler.sigma_floor", "must be positive");
  if (j.contains("eta0")) spec.eta0 = get_number(j.at("eta0"), "sampler.eta0");
  if (spec.eta0 <= 0.0) bad_field("sampler.eta0", "must be positive");
  if (j.contains("delta")) spec.delta = get_number(j.at("delta"), "sampler.delta");
  if (spec.delta <= 0.0 || spec.delta > 1.0) bad_field("sampler.delta", "must lie in (0, 1]");
  if (j.contains("refine_steps")) spec.refine_steps = get_int(j.at("refine_steps"), "sampler.refine_steps");
  if (spec.refine_steps < 0) bad_field("sampler.refine_steps", "must be nonnegative");
  if (j.contains("with_prior")) spec.with_prior = j.at("with_prior").get<bool>();
  if (j.contains("grad_convention"))
    spec.grad_convention = j.at("grad_convention").get<std::string>();
  if (spec.grad_convention != "paper_literal" && spec.grad_convention != "exact_score")
    bad_field("sampler.grad_convention", "must be 'paper_literal' or 'exact_score'");
  if (j.contains("gamma_eff")) spec.gamma_eff = get_number(j.at("gamma_eff"), "sampler.gamma_eff");
  if (spec.gamma_eff <= 0.0) bad_field("sampler.gamma_eff", "must be positive");
  if (j.contains("daps_ode_steps")) spec.daps_ode_steps = get_int(j.at("daps_ode_steps"), "sampler.daps_ode_steps");
  if (spec.daps_ode_steps < 1) bad_field("sampler.daps_ode_steps", "must be at least 1");
  if (j.contains("daps_refine_steps"))
    spec.daps_refine_steps = get_int(j.at("daps_refine_steps"), "sampler.daps_refine_steps");
  if (spec.daps_refine_steps < 0) bad_field("sampler.daps_refine_steps", "must be nonnegative");
  if (j.contains("daps_with_prior")) spec.daps_with_prior = j.at("daps_with_prior").get<bool>();
  if (j.contains("trace_diagnostics")) spec.trace_diagnostics = j.at("trace_diagnostics").get<bool>();
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "identity", "sr4", "inpaint", "gaussian_blur", "motion_blur", "hdr", "phase"};
  return names;
}

void apply_preset(const std::string& task, RunConfig& cfg) {
  cfg.task = task;
  cfg.prior = PriorSpec{};  // 16x16 image prior around mid-gray
  cfg.prior.dim = 256;
  cfg.prior.mean = Vec::Constant(256, 0.5);
  cfg.prior.tau2 = 0.04;
  cfg.op = OperatorSpec{};
  cfg.op.rows = 16;
  cfg.op.cols = 16;
  cfg.sampler = SamplerSpec{};

  if (task == "identity") {
    cfg.op.type = "identity";
    cfg.sampler.eta0 = 5e-5;
    cfg.sampler.refine_steps = 5;
  } else if (task == "sr4") {
    cfg.op.type = "downsample_avg";
    cfg.op.factor = 4;
    cfg.sampler.eta0 = 1e-3;
    cfg.sampler.refine_steps = 2;
  } else if (task == "inpaint") {
    cfg.op.type = "mask_inpaint";
    cfg.op.hidden_box = {5, 5, 6, 6};
    cfg.sampler.eta0 = 1e-4;
    cfg.sampler.refine_steps = 5;
  } else if (task == "gaussian_blur") {
    cfg.op.type = "conv2d";
    cfg.op.kernel = "gaussian";
    cfg.op.kernel_size = 7;
    cfg.op.kernel_std = 1.5;
    cfg.sampler.eta0 = 1e-4;
    cfg.sampler.refine_steps = 8;
  } else if (task == "motion_blur") {
    cfg.op.type = "conv2d";
    cfg.op.kernel = "motion";
    cfg.op.kernel_size = 5;
    cfg.sampler.eta0 = 1e-4;
    cfg.sampler.refine_steps = 8;
  } else if (task == "hdr") {
    cfg.op.type = "hdr_clip";
    cfg.op.alpha = 2.0;
    cfg.sampler.eta0 = 2.5e-5;
    cfg.sampler.refine_steps = 5;
  } else if (task == "phase") {
    cfg.op.type = "phase_magnitude";
    cfg.op.rows = 8;
    cfg.op.cols = 8;
    cfg.op.oversample = 2;
    cfg.prior.dim = 64;
    cfg.prior.mean = Vec::Constant(64, 0.5);
    cfg.sampler.eta0 = 1e-5;
    cfg.sampler.refine_steps = 50;
  } else {
    bad_field("task", "unknown preset '" + task + "'");
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  RunConfig cfg;
  if (j.contains("task")) apply_preset(j.at("task").get<std::string>(), cfg);
  if (j.contains("prior")) parse_prior(j.at("prior"), cfg.prior);
  if (j.contains("operator")) parse_operator(j.at("operator"), cfg.op);
  if (j.contains("measurement")) parse_measurement(j.at("measurement"), cfg.measurement);
  if (j.contains("sampler")) parse_sampler(j.at("sampler"), cfg.sampler);
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_array() || s.empty()) bad_field("seeds", "must be a nonempty array");
    cfg.seeds.clear();
    for (const auto& v : s) cfg.seeds.push_back(v.get<std::uint64_t>());
  }
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();

  // Cross-field checks that the factories would otherwise hit later.
  build_operator(cfg.op);
  auto model = build_prior(cfg.prior);
  if (model->dim() != build_operator(cfg.op)->input_dim())
    throw ConfigError("prior.dim does not match the operator input dimension");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

PriorSpec parse_prior_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("prior spec is not valid JSON: ") + e.what());
  }
  PriorSpec spec;
  parse_prior(j, spec);
  return spec;
}

OperatorSpec parse_operator_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("operator spec is not valid JSON: ") + e.what());
  }
  OperatorSpec spec;
  parse_operator(j, spec);
  return spec;
}

std::string serialize_run_config(const RunConfig& cfg) {
  json j;
  if (!cfg.task.empty()) j["task"] = cfg.task;

  json p;
  p["type"] = cfg.prior.type;
  if (cfg.prior.type == "isotropic_gaussian") {
    p["dim"] = cfg.prior.dim;
    p["mean"] = vector_to_json(cfg.prior.mean);
    p["tau2"] = cfg.prior.tau2;
  } else {
    p["weights"] = cfg.prior.weights;
    json means = json::array();
    for (const Vec& m : cfg.prior.means) means.push_back(vector_to_json(m));
    p["means"] = means;
    json covs = json::array();
    for (const Mat& c : cfg.prior.covariances) covs.push_back(matrix_to_json(c));
    p["covariances"] = covs;
  }
  j["prior"] = p;

  json o;
  o["type"] = cfg.op.type;
  o["rows"] = cfg.op.rows;
  o["cols"] = cfg.op.cols;
  if (cfg.op.type == "mask_inpaint") {
    if (!cfg.op.mask.empty()) {
      o["mask"] = cfg.op.mask;
    } else {
      o["hidden_box"] = cfg.op.hidden_box;
    }
  } else if (cfg.op.type == "conv2d") {
    o["kernel"] = cfg.op.kernel;
    o["kernel_size"] = cfg.op.kernel_size;
    o["kernel_std"] = cfg.op.kernel_std;
    if (cfg.op.kernel == "custom") o["kernel_values"] = matrix_to_json(cfg.op.kernel_values);
  } else if (cfg.op.type == "downsample_avg") {
    o["factor"] = cfg.op.factor;
  } else if (cfg.op.type == "hdr_clip") {
    o["alpha"] = cfg.op.alpha;
  } else if (cfg.op.type == "phase_magnitude") {
    o["oversample"] = cfg.op.oversample;
  }
  j["operator"] = o;

  json m;
  m["gamma"] = cfg.measurement.gamma;
  m["seed"] = cfg.measurement.seed;
  m["truth"] = cfg.measurement.truth;
  if (!cfg.measurement.x_file.empty()) m["x_file"] = cfg.measurement.x_file;
  m["source"] = cfg.measurement.source;
  if (!cfg.measurement.y_file.empty()) m["y_file"] = cfg.measurement.y_file;
  j["measurement"] = m;

  json s;
  s["method"] = cfg.sampler.method;
  s["n_anneal"] = cfg.sampler.n_anneal;
  s["sigma_max"] = cfg.sampler.sigma_max;
  s["sigma_min"] = cfg.sampler.sigma_min;
  s["rho"] = cfg.sampler.rho;
  s["sigma_bar"] = cfg.sampler.sigma_bar;
  s["ode_steps_below_bar"] = cfg.sampler.ode_steps_below_bar;
  s["estep_method"] = cfg.sampler.estep_method;
  s["sigma_floor"] = cfg.sampler.sigma_floor;
  s["eta0"] = cfg.sampler.eta0;
  s["delta"] = cfg.sampler.delta;
  s["refine_steps"] = cfg.sampler.refine_steps;
  s["with_prior"] = cfg.sampler.with_prior;
  s["grad_convention"] = cfg.sampler.grad_convention;
  s["gamma_eff"] = cfg.sampler.gamma_eff;
  s["daps_ode_steps"] = cfg.sampler.daps_ode_steps;
  s["daps_refine_steps"] = cfg.sampler.daps_refine_steps;
  s["daps_with_prior"] = cfg.sampler.daps_with_prior;
  s["trace_diagnostics"] = cfg.sampler.trace_diagnostics;
  j["sampler"] = s;

  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2);
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  RunConfig a2 = a, b2 = b;
  a2.task.clear();
  b2.task.clear();
  return serialize_run_config(a2) == serialize_run_config(b2);
}

std::unique_ptr<ScoreModel> build_prior(const PriorSpec& spec) {
  if (spec.type == "isotropic_gaussian") {
    return std::make_unique<IsotropicGaussianPrior>(spec.mean, spec.tau2);
  }
  if (spec.type == "gmm") {
    try {
      return std::make_unique<GmmPrior>(spec.weights, spec.means, spec.covariances);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("prior: ") + e.what());
    }
  }
  throw ConfigError("unknown prior type '" + spec.type + "'");
}

std::shared_ptr<const ForwardOperator> build_operator(const OperatorSpec& spec) {
  try {
    if (spec.type == "identity") {
      return std::make_shared<IdentityOp>(spec.rows * spec.cols);
    }
    if (spec.type == "mask_inpaint") {
      std::vector<int> mask = spec.mask;
      if (mask.empty()) {
        require(spec.hidden_box.size() == 4, "operator.hidden_box must have 4 entries");
        mask.assign(static_cast<std::size_t>(spec.rows * spec.cols), 1);
        for (Eigen::Index r = spec.hidden_box[0]; r < spec.hidden_box[0] + spec.hidden_box[2]; ++r)
          for (Eigen::Index c = spec.hidden_box[1]; c < spec.hidden_box[1] + spec.hidden_box[3]; ++c) {
            require(r >= 0 && r < spec.rows && c >= 0 && c < spec.cols,
                    "operator.hidden_box outside the grid");
            mask[static_cast<std::size_t>(r * spec.cols + c)] = 0;
          }
      } else {
        require(static_cast<Eigen::Index>(mask.size()) == spec.rows * spec.cols,
                "operator.mask must have rows*cols entries");
      }
      return std::make_shared<MaskInpaintOp>(std::move(mask));
    }
    if (spec.type == "conv2d") {
      Mat k;
      if (spec.kernel == "gaussian") {
        k = gaussian_kernel(spec.kernel_size, spec.kernel_std);
      } else if (spec.kernel == "motion") {
        k = motion_kernel(spec.kernel_size);
      } else {
        k = spec.kernel_values;
      }
      return std::make_shared<Conv2dOp>(spec.rows, spec.cols, std::move(k));
    }
    if (spec.type == "downsample_avg") {
      Eigen::Index fr = spec.rows == 1 ? 1 : spec.factor;
      return std::make_shared<DownsampleAvgOp>(spec.rows, spec.cols, fr, spec.factor);
    }
    if (spec.type == "hdr_clip") {
      return std::make_shared<HdrClipOp>(spec.rows * spec.cols, spec.alpha);
    }
    if (spec.type == "phase_magnitude") {
      return std::make_shared<PhaseMagnitudeOp>(spec.rows, spec.cols, spec.oversample);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("operator: ") + e.what());
  }
  throw ConfigError("unknown operator type '" + spec.type + "'");
}

MeasurementInstance build_measurement(const RunConfig& cfg, const ScoreModel& model,
                                      const std::shared_ptr<const ForwardOperator>& op,
                                      const std::string& base_dir) {
  namespace fs = std::filesystem;
  auto resolve = [&base_dir](const std::string& p) {
    fs::path path(p);
    if (path.is_absolute() || base_dir.empty()) return path.string();
    return (fs::path(base_dir) / path).string();
  };

  MeasurementInstance out;
  std::optional<Vec> truth;
  if (cfg.measurement.truth == "file") {
    truth = read_dpx_vector(resolve(cfg.measurement.x_file));
    require(truth->size() == op->input_dim(), "measurement: x_file dimension mismatch");
  } else if (cfg.measurement.source == "simulate") {
    Rng truth_rng = Rng::derive(cfg.measurement.seed, "truth");
    truth = model.sample(truth_rng);
  }

  Vec y;
  if (cfg.measurement.source == "file") {
    y = read_dpx_vector(resolve(cfg.measurement.y_file));
    require(y.size() == op->output_dim(), "measurement: y_file dimension mismatch");
  } else {
    require(truth.has_value(), "measurement: simulation requires a ground truth");
    Rng noise_rng = Rng::derive(cfg.measurement.seed, "measure_noise");
    y = op->apply(*truth) + cfg.measurement.gamma * noise_rng.normal_vec(op->output_dim());
  }

  out.meas = Measurement{std::move(y), cfg.measurement.gamma, op};
  out.truth = std::move(truth);
  return out;
}

SamplerConfig build_sampler_config(const RunConfig& cfg, std::uint64_t seed) {
  SamplerConfig sc;
  sc.schedule = NoiseSchedule{cfg.sampler.sigma_max, cfg.sampler.sigma_min,
                              cfg.sampler.n_anneal + 1, cfg.sampler.rho};
  sc.step_sizes = StepSizeSchedule{cfg.sampler.eta0, cfg.sampler.delta};
  sc.refine_steps = cfg.sampler.refine_steps;
  sc.with_prior = cfg.sampler.with_prior;
  sc.grad_convention = grad_convention_from_string(cfg.sampler.grad_convention);
  sc.sigma_bar = cfg.sampler.sigma_bar;
  sc.ode_steps_below_bar = cfg.sampler.ode_steps_below_bar;
  sc.estep_method = ode_method_from_string(cfg.sampler.estep_method);
  sc.sigma_floor = cfg.sampler.sigma_floor;
  sc.gamma_eff = cfg.sampler.gamma_eff;
  sc.seed = seed;
  sc.daps_ode_steps = cfg.sampler.daps_ode_steps;
  sc.daps_refine_steps = cfg.sampler.daps_refine_steps;
  sc.daps_with_prior = cfg.sampler.daps_with_prior;
  sc.trace_diagnostics = cfg.sampler.trace_diagnostics;
  return sc;
}

}  // namespace dapspp
