// Experiment runner for the dapspp library. All work happens behind the
// C API in libdapspp; this binary only parses arguments and reports status.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dapspp/dapspp.h"

namespace {

int report(int rc) {
  if (rc != DAPSPP_OK) std::fprintf(stderr, "dapspp: %s\n", dapspp_last_error());
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoupled annealing sampler for Bayesian inverse problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  int threads = 0;

  auto add_common = [&](CLI::App* cmd, bool with_out, bool with_threads) {
    cmd->add_option("--config", config_path, "Run config JSON file")->required();
    if (with_out) cmd->add_option("--out", out_dir, "Output directory (overrides config)");
    cmd->add_option("--seeds", seeds, "Comma-separated seed list (overrides config)");
    if (with_threads) cmd->add_option("--threads", threads, "Concurrent seeds (default 1)");
  };

  CLI::App* run = app.add_subcommand("run", "Execute the configured sampler per seed");
  add_common(run, true, true);

  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  add_common(sweep, true, true);
  std::string param;
  std::vector<double> values;
  sweep->add_option("--param", param, "One of sigma_bar, rho, gamma, J, K")->required();
  sweep->add_option("--values", values, "Sweep values")->required()->delimiter(',');

  CLI::App* diagnose = app.add_subcommand("diagnose", "Trace gradient diagnostics and warm starts");
  add_common(diagnose, true, false);

  CLI::App* oracle = app.add_subcommand("oracle-check", "Compare sampler moments to the closed-form posterior");
  add_common(oracle, false, false);

  CLI11_PARSE(app, argc, argv);

  const char* out_arg = out_dir.empty() ? nullptr : out_dir.c_str();
  const char* seeds_arg = seeds.empty() ? nullptr : seeds.c_str();

  if (run->parsed()) {
    return report(dapspp_run(config_path.c_str(), out_arg, seeds_arg, threads));
  }
  if (sweep->parsed()) {
    return report(dapspp_sweep(config_path.c_str(), param.c_str(), values.data(), values.size(),
                               out_arg, seeds_arg, threads));
  }
  if (diagnose->parsed()) {
    return report(dapspp_diagnose(config_path.c_str(), out_arg, seeds_arg));
  }
  std::string buffer(1 << 16, '\0');
  int rc = dapspp_oracle_check(config_path.c_str(), seeds_arg, buffer.data(), buffer.size());
  if (rc == DAPSPP_OK) std::fputs(buffer.c_str(), stdout);
  return report(rc);
}
