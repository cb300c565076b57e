/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specda/ensemble.hpp"
#include "specda/filter.hpp"
#include "specda/model.hpp"
#include "specda/spectral.hpp"

namespace specda {

/// Model subsection of an experiment configuration.
struct ModelSection {
  int dimension = 128;
  double forcing = 8.0;
  double dt = 0.01;
  double spinup_duration = 100.0;
  double spinup_perturbation = 1e-3;
};

/// Observation protocol subsection.
struct ObservationSection {
  int steps_per_cycle = 15;   ///< model steps between assimilations
  int resolution_stride = 1;  ///< observe every stride-th component
  double noise_std = 0.364;   ///< observation noise standard deviation
};

/// Filter subsection.
struct FilterSection {
  int ensemble_size = 20;
  double rho = 1.0;    ///< multiplicative inflation, >= 1
  double c = 4.0;      ///< Gaspari-Cohn halfwidth, > 0
  double sigma = 0.0;  ///< smoothing kernel width, >= 0
  SmoothingMode mode = SmoothingMode::kOff;
};

/// Run-control subsection.
struct RunSection {
  int n_cycles = 1333;
  int rmse_window = 350;
  std::uint64_t seed = 1;
};

/// Full twin-experiment description.
struct ExperimentConfig {
  ModelSection model;
  ObservationSection observation;
  FilterSection filter;
  RunSection run;

  ModelParams model_params() const;
  FilterConfig filter_config() const;
  ObservationSetup observation_setup() const;
  /// Model time covered by one assimilation cycle.
  double cycle_time() const { return observation.steps_per_cycle * model.dt; }

  void validate() const;
};

/// Outcome of one twin experiment. On divergence the series stop at the
/// detection cycle and `diverged` is set; the time-averaged RMSE is then the
/// mean over however much of the window is available.
struct ExperimentResult {
  std::vector<double> rmse_series;    ///< posterior RMSE per cycle
  std::vector<double> spread_series;  ///< mean per-component ensemble std
  double time_averaged_rmse = 0.0;    ///< mean of the last rmse_window entries
  bool diverged = false;
  int divergence_cycle = -1;  ///< 1-based cycle of detection, -1 if none
  ExperimentConfig config;    ///< echo of the inputs
  double wall_time_seconds = 0.0;
};

/// y_j = H u_j + eps_j with seeded deterministic Gaussian noise.
std::vector<Eigen::VectorXd> make_observations(
    const std::vector<StateVector>& truth, const ObservationSetup& setup,
    std::uint64_t seed);

/// truth0 plus independent Gaussian perturbations of the given spread. Draws
/// are indexed by (member, component), so the first K members coincide across
/// different ensemble sizes under the same seed. Throws
/// DegenerateEnsembleError for K < 2 or spread <= 0.
Ensemble initial_ensemble(const StateVector& truth0, int size, double spread,
                          std::uint64_t seed);

/// Runs the full twin experiment: spin-up, truth and observation generation,
/// then n_cycles of propagate + assimilation. Divergence (sustained RMSE
/// above 10x the truth's climatological std, or integrator overflow) ends the
/// run early with partial results retained.
ExperimentResult run_twin_experiment(const ExperimentConfig& config);

/// One evaluated tuning cell.
struct TuningCell {
  double rho = 1.0;
  double c = 1.0;
  double sigma = 0.0;
  double rmse = 0.0;
  bool diverged = false;
};

/// Tuning outcome; `success` is false when every cell diverged.
struct TuneResult {
  bool success = false;
  FilterSection best;
  double best_rmse = 0.0;
  std::vector<TuningCell> cells;
  std::string message;
};

/// Semi-joint parameter search: (rho, c) at sigma = 0, then sigma at that
/// optimum, then (rho, c) again at the chosen sigma. Repeated cells are
/// evaluated once. Cells may be evaluated on `jobs` worker threads; results
/// are identical to a sequential run.
TuneResult semi_joint_tune(const ExperimentConfig& base,
                           const std::vector<double>& rho_grid,
                           const std::vector<double>& c_grid,
                           const std::vector<double>& sigma_grid,
                           int jobs = 1);

/// Before/after-smoothing covariance ratios at snapshot times. Entries where
/// the before-value is exactly zero are NaN ("undefined").
struct DiagnosticsResult {
  std::vector<double> snapshot_times;
  std::vector<Eigen::VectorXd> variance_ratio;  ///< diag(C_after)/diag(C_before)
  std::vector<Eigen::VectorXd> offdiag_ratio;   ///< first cyclic off-diagonal
};

/// Per-component diagonal and first-cyclic-off-diagonal ratios of two
/// covariance matrices. Entries whose before-value is exactly zero (e.g. an
/// ensemble with no spread) are NaN.
std::pair<Eigen::VectorXd, Eigen::VectorXd> covariance_ratios(
    const Eigen::MatrixXd& before, const Eigen::MatrixXd& after);

/// Runs the experiment and, at each snapshot time, compares the prior
/// covariance before and after one spectrum-smoothing application (no
/// inflation or localization enters the comparison). Snapshot times must lie
/// on assimilation cycles.
DiagnosticsResult smoothing_diagnostics(const ExperimentConfig& config,
                                        const std::vector<double>& snapshot_times);

/// Mean power spectra of free-running ensembles of the requested sizes.
struct SpectrumStudyEntry {
  int ensemble_size = 0;
  SpectrumProfile raw;
  std::optional<SpectrumProfile> smoothed;  ///< after one smoothing update
};

/// Free-runs ensembles of each size (no assimilation) to `free_run_time` and
/// returns their mean power spectra, optionally together with the spectrum
/// after one smoothing application at the config's sigma. All sizes share one
/// seed family, so smaller ensembles are prefixes of larger ones.
std::vector<SpectrumStudyEntry> free_run_spectrum_study(
    const ExperimentConfig& config, const std::vector<int>& sizes,
    bool with_smoothing, double free_run_time = 48.8, int jobs = 1);

}  // namespace specda
