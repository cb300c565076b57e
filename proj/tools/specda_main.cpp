/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specda/config.hpp"
#include "specda/errors.hpp"
#include "specda/experiment.hpp"
#include "specda/io.hpp"
#include "specda/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--config", options.config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", options.out_dir, "output directory");
  cmd->add_option("--seed", options.seed_override, "seed override");
}

specda::ExperimentConfig load(const CommonOptions& options) {
  specda::ExperimentConfig config = specda::load_config(options.config_path);
  if (options.seed_override) config.run.seed = *options.seed_override;
  std::filesystem::create_directories(options.out_dir);
  return config;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

int run_truth(const CommonOptions& options) {
  const Stopwatch timer;
  const specda::ExperimentConfig config = load(options);
  config.validate();
  const specda::ModelParams params = config.model_params();
  const specda::StateVector initial = specda::spin_up(
      params, config.model.spinup_perturbation, config.model.spinup_duration);
  const auto truth = specda::generate_truth(
      initial, params, config.run.n_cycles, config.observation.steps_per_cycle);
  specda::write_truth_csv(join(options.out_dir, "truth.csv"), truth,
                          config.cycle_time());
  specda::write_manifest(join(options.out_dir, "manifest.json"), "truth",
                         config, config.run.seed, timer.seconds());
  return kExitOk;
}

int run_experiment(const CommonOptions& options) {
  const Stopwatch timer;
  const specda::ExperimentConfig config = load(options);
  const specda::ExperimentResult result = specda::run_twin_experiment(config);
  specda::write_result_csv(join(options.out_dir, "rmse.csv"), result);
  specda::write_manifest(join(options.out_dir, "manifest.json"), "run", config,
                         config.run.seed, timer.seconds());
  if (result.diverged) {
    std::cerr << "specda: filter diverged at cycle " << result.divergence_cycle
              << "; partial series written\n";
    return kExitNumerical;
  }
  std::cout << "time-averaged RMSE over last " << config.run.rmse_window
            << " cycles: " << result.time_averaged_rmse << "\n";
  return kExitOk;
}

int run_tune(const CommonOptions& options, const std::string& rho_spec,
             const std::string& c_spec, const std::string& sigma_spec,
             int jobs) {
  const Stopwatch timer;
  const specda::ExperimentConfig config = load(options);
  const auto rho_grid = specda::parse_grid_spec(rho_spec);
  const auto c_grid = specda::parse_grid_spec(c_spec);
  const auto sigma_grid = specda::parse_grid_spec(sigma_spec);
  const specda::TuneResult tuned =
      specda::semi_joint_tune(config, rho_grid, c_grid, sigma_grid, jobs);
  specda::write_tuning_csv(join(options.out_dir, "tuning.csv"), tuned.cells);

  specda::ExperimentConfig best_config = config;
  if (tuned.success) best_config.filter = tuned.best;
  specda::write_manifest(join(options.out_dir, "manifest.json"), "tune",
                         best_config, config.run.seed, timer.seconds());
  if (!tuned.success) {
    std::cerr << "specda: tuning failed: " << tuned.message << "\n";
    return kExitNumerical;
  }
  std::cout << "best rho=" << tuned.best.rho << " c=" << tuned.best.c
            << " sigma=" << tuned.best.sigma << " rmse=" << tuned.best_rmse
            << "\n";
  return kExitOk;
}

int run_spectrum(const CommonOptions& options, const std::vector<int>& sizes,
                 bool with_smoothing, double free_run_time) {
  const Stopwatch timer;
  const specda::ExperimentConfig config = load(options);
  const auto entries = specda::free_run_spectrum_study(
      config, sizes, with_smoothing, free_run_time);
  for (const auto& entry : entries) {
    const std::string stem = "spectrum_k" + std::to_string(entry.ensemble_size);
    specda::write_spectrum_csv(join(options.out_dir, stem + ".csv"), entry.raw);
    if (entry.smoothed) {
      specda::write_spectrum_csv(join(options.out_dir, stem + "_smoothed.csv"),
                                 *entry.smoothed);
    }
  }
  specda::write_manifest(join(options.out_dir, "manifest.json"), "spectrum",
                         config, config.run.seed, timer.seconds());
  return kExitOk;
}

int run_diagnose(const CommonOptions& options,
                 const std::vector<double>& times) {
  const Stopwatch timer;
  const specda::ExperimentConfig config = load(options);
  const specda::DiagnosticsResult diagnostics =
      specda::smoothing_diagnostics(config, times);
  specda::write_diagnostics_csv(join(options.out_dir, "diagnostics.csv"),
                                diagnostics);
  specda::write_manifest(join(options.out_dir, "manifest.json"), "diagnose",
                         config, config.run.seed, timer.seconds());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble transform Kalman filter with spectrum-smoothing "
               "sampling-error mitigation on the Lorenz 96 testbed"};
  app.set_version_flag("--version", specda::kVersion);
  app.require_subcommand(1);

  CommonOptions truth_options;
  CLI::App* truth_cmd =
      app.add_subcommand("truth", "generate and export a truth trajectory");
  add_common(truth_cmd, truth_options);

  CommonOptions run_options;
  CLI::App* run_cmd = app.add_subcommand("run", "run one twin experiment");
  add_common(run_cmd, run_options);

  CommonOptions tune_options;
  std::string rho_spec = "1:1.2:0.01";
  std::string c_spec = "1:15:1";
  std::string sigma_spec = "0.1:1:0.1";
  int jobs = 1;
  CLI::App* tune_cmd =
      app.add_subcommand("tune", "semi-joint parameter sweep");
  add_common(tune_cmd, tune_options);
  tune_cmd->add_option("--rho", rho_spec, "inflation grid start:stop:step");
  tune_cmd->add_option("--c", c_spec, "localization grid start:stop:step");
  tune_cmd->add_option("--sigma", sigma_spec, "kernel width grid start:stop:step");
  tune_cmd->add_option("--jobs", jobs, "worker threads for tuning cells")
      ->check(CLI::PositiveNumber);

  CommonOptions spectrum_options;
  std::vector<int> sizes;
  bool with_smoothing = false;
  double free_run_time = 48.8;
  CLI::App* spectrum_cmd = app.add_subcommand(
      "spectrum", "free-run mean power spectra for several ensemble sizes");
  add_common(spectrum_cmd, spectrum_options);
  spectrum_cmd->add_option("--sizes", sizes, "ensemble sizes")
      ->required()
      ->delimiter(',');
  spectrum_cmd->add_flag("--smooth", with_smoothing,
                         "also dump spectra after one smoothing update");
  spectrum_cmd->add_option("--time", free_run_time, "free-run end time");

  CommonOptions diagnose_options;
  std::vector<double> snapshot_times = {45.0, 90.0, 135.0, 180.0};
  CLI::App* diagnose_cmd = app.add_subcommand(
      "diagnose", "before/after-smoothing covariance ratio profiles");
  add_common(diagnose_cmd, diagnose_options);
  diagnose_cmd->add_option("--times", snapshot_times, "snapshot times")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (truth_cmd->parsed()) return run_truth(truth_options);
    if (run_cmd->parsed()) return run_experiment(run_options);
    if (tune_cmd->parsed()) {
      return run_tune(tune_options, rho_spec, c_spec, sigma_spec, jobs);
    }
    if (spectrum_cmd->parsed()) {
      return run_spectrum(spectrum_options, sizes, with_smoothing,
                          free_run_time);
    }
    if (diagnose_cmd->parsed()) return run_diagnose(diagnose_options, snapshot_times);
  } catch (const specda::InvalidParameterError& e) {
    std::cerr << "specda: " << e.what() << "\n";
    return kExitUsage;
  } catch (const specda::InvalidModelError& e) {
    std::cerr << "specda: " << e.what() << "\n";
    return kExitUsage;
  } catch (const specda::ShapeError& e) {
    std::cerr << "specda: " << e.what() << "\n";
    return kExitUsage;
  } catch (const specda::DegenerateEnsembleError& e) {
    std::cerr << "specda: " << e.what() << "\n";
    return kExitUsage;
  } catch (const specda::Error& e) {
    std::cerr << "specda: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "specda: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
