// Command-line front end: sweep runs, gradient self-check, version.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "dmabep/errors.hpp"
#include "dmabep/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitIo = 3;

constexpr double kGradientTolerance = 1e-6;

struct RunOptions {
  std::string config_path;
  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::optional<std::size_t> mc_trials;
  std::optional<std::size_t> workers;
  std::vector<std::string> overrides;
};

int do_run(const RunOptions& opt) {
  dmabep::ExperimentConfig cfg;
  try {
    cfg = dmabep::load_config(opt.config_path);
    for (const auto& kv : opt.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      dmabep::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opt.seed) cfg.master_seed = *opt.seed;
    if (opt.realizations) cfg.n_realizations = *opt.realizations;
    if (opt.mc_trials) cfg.mc_trials = *opt.mc_trials;
    if (opt.workers) cfg.workers = *opt.workers;
    cfg.validate();
  } catch (const dmabep::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }

  const dmabep::ExperimentResult result = dmabep::run_experiment(cfg);
  try {
    dmabep::emit_results(result, cfg, opt.out_dir);
  } catch (const dmabep::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }

  for (const auto& a : result.aggregates) {
    std::cout << "M=" << a.alphabet_size << " N_d=" << a.n_microstrips << " mean_bound="
              << dmabep::format_number(a.mean_bound) << " median_bound=" << dmabep::format_number(a.median_bound)
              << " ok=" << a.n_ok << '\n';
    if (a.n_ok == 0) std::cerr << "warning: every realization failed for this cell\n";
  }
  int status = kExitOk;
  for (const auto& r : result.records) {
    if (!r.ok) {
      std::cerr << "realization " << r.realization << " (M=" << r.alphabet_size << ", N_d=" << r.n_microstrips
                << ") failed: " << r.error << '\n';
    }
    if (!dmabep::union_bound_holds(r)) {
      std::cerr << "union bound violated: M=" << r.alphabet_size << " N_d=" << r.n_microstrips
                << " mc_ber=" << dmabep::format_number(*r.mc_ber)
                << " bound=" << dmabep::format_number(r.bep_bound) << '\n';
      status = kExitInvariant;
    }
  }
  return status;
}

int do_check_gradients(std::uint64_t seed) {
  const auto checks = dmabep::run_gradient_checks(seed, 20);
  bool ok = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& c = checks[i];
    const bool pass = c.rel_error_q <= kGradientTolerance && c.rel_error_p <= kGradientTolerance;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " instance " << i << " (N_d=" << c.n_microstrips
              << " N_e=" << c.n_elements_per_strip << " N_r=" << c.n_rx << " M=" << c.alphabet_size
              << ") rel_err_q=" << c.rel_error_q << " rel_err_p=" << c.rel_error_p << '\n';
  }
  return ok ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit-error-probability minimisation for DMA-based MIMO links"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run the Monte Carlo sweep described by a config file");
  run->add_option("--config", run_opt.config_path, "Config file (key = value lines)")->required();
  run->add_option("--out", run_opt.out_dir, "Output directory")->capture_default_str();
  run->add_option("--seed", run_opt.seed, "Master seed");
  run->add_option("--realizations", run_opt.realizations, "Channel realizations per cell");
  run->add_option("--mc-trials", run_opt.mc_trials, "ML-detection trials for bound validation (0 = off)");
  run->add_option("--workers", run_opt.workers, "Concurrent realizations");
  run->add_option("--set", run_opt.overrides, "Override any config key, key=value (repeatable)");

  std::uint64_t grad_seed = 1;
  auto* grad = app.add_subcommand("check-gradients", "Compare closed-form gradients with finite differences");
  grad->add_option("--seed", grad_seed, "Seed for the random instances")->capture_default_str();

  auto* version = app.add_subcommand("version", "Print build information");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return do_run(run_opt);
  if (*grad) return do_check_gradients(grad_seed);
  if (*version) {
    std::cout << "dmabep " << dmabep::version_string() << " (Eigen " << EIGEN_WORLD_VERSION << '.'
              << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << ", C++ " << __cplusplus << ")\n";
    return kExitOk;
  }
  return kExitOk;
}
