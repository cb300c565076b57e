/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "specda/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>

#include "parallel.hpp"
#include "specda/errors.hpp"
#include "specda/random.hpp"

namespace specda {

namespace {

constexpr double kDivergenceFactor = 10.0;
constexpr int kDivergenceRunLength = 50;

double mean_of_tail(const std::vector<double>& series, int window) {
  if (series.empty()) return std::numeric_limits<double>::quiet_NaN();
  const int count = std::min<int>(window, static_cast<int>(series.size()));
  double sum = 0.0;
  for (int i = static_cast<int>(series.size()) - count;
       i < static_cast<int>(series.size()); ++i) {
    sum += series[static_cast<std::size_t>(i)];
  }
  return sum / count;
}

// Climatological std of the truth trajectory: mean over components of the
// per-component temporal variance. Used only to scale the divergence guard.
double climatological_std(const std::vector<StateVector>& truth) {
  const auto cycles = static_cast<double>(truth.size());
  StateVector mean = StateVector::Zero(truth.front().size());
  for (const StateVector& state : truth) mean += state;
  mean /= cycles;
  double variance = 0.0;
  for (const StateVector& state : truth) {
    variance += (state - mean).squaredNorm();
  }
  variance /= cycles * static_cast<double>(truth.front().size());
  return std::sqrt(variance);
}

// Shared twin-experiment loop. `on_prior` (when set) sees the prior ensemble
// right after propagation and before the assimilation step.
ExperimentResult run_cycles(
    const ExperimentConfig& config,
    const std::function<void(int cycle, const Ensemble& prior)>& on_prior) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const ModelParams params = config.model_params();
  const StateVector truth0 = spin_up(params, config.model.spinup_perturbation,
                                     config.model.spinup_duration);
  const std::vector<StateVector> truth = generate_truth(
      truth0, params, config.run.n_cycles, config.observation.steps_per_cycle);
  const ObservationSetup setup = config.observation_setup();
  const std::vector<Eigen::VectorXd> observations =
      make_observations(truth, setup, config.run.seed);

  Ensemble ensemble =
      initial_ensemble(truth0, config.filter.ensemble_size,
                       config.observation.noise_std, config.run.seed);

  const FilterConfig filter_config = config.filter_config();
  const LocalizationMatrix localization =
      localization_matrix(params.dimension, filter_config.localization_halfwidth);
  const SmoothingKernel kernel =
      gaussian_kernel(filter_config.smoothing_sigma,
                      default_truncation_radius(filter_config.smoothing_sigma));

  const double divergence_threshold =
      kDivergenceFactor * climatological_std(truth);
  const double sqrt_n = std::sqrt(static_cast<double>(params.dimension));

  ExperimentResult result;
  result.config = config;
  result.rmse_series.reserve(static_cast<std::size_t>(config.run.n_cycles));
  result.spread_series.reserve(static_cast<std::size_t>(config.run.n_cycles));

  int consecutive_above = 0;
  for (int cycle = 1; cycle <= config.run.n_cycles; ++cycle) {
    try {
      ensemble =
          propagate(ensemble, params, config.observation.steps_per_cycle);
      if (on_prior) on_prior(cycle, ensemble);
      ensemble = assimilation_cycle(
          ensemble, observations[static_cast<std::size_t>(cycle - 1)], setup,
          filter_config, localization, kernel);
    } catch (const NumericalOverflowError&) {
      result.diverged = true;
      result.divergence_cycle = cycle;
      break;
    }

    const EnsembleStats stats = decompose(ensemble);
    const double rmse =
        (stats.mean - truth[static_cast<std::size_t>(cycle - 1)]).norm() /
        sqrt_n;
    const double spread =
        stats.perturbations.cwiseAbs2().rowwise().sum().cwiseSqrt().mean();
    result.rmse_series.push_back(rmse);
    result.spread_series.push_back(spread);

    consecutive_above = rmse > divergence_threshold ? consecutive_above + 1 : 0;
    if (consecutive_above >= kDivergenceRunLength) {
      result.diverged = true;
      result.divergence_cycle = cycle;
      break;
    }
  }

  result.time_averaged_rmse =
      mean_of_tail(result.rmse_series, config.run.rmse_window);
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace

ModelParams ExperimentConfig::model_params() const {
  return ModelParams{model.dimension, model.forcing, model.dt};
}

FilterConfig ExperimentConfig::filter_config() const {
  FilterConfig out;
  out.inflation = filter.rho;
  out.localization_halfwidth = filter.c;
  out.smoothing_sigma = filter.sigma;
  out.mode = filter.mode;
  return out;
}

ObservationSetup ExperimentConfig::observation_setup() const {
  return strided_observations(model.dimension, observation.resolution_stride,
                              observation.noise_std);
}

void ExperimentConfig::validate() const {
  model_params().validate();
  filter_config().validate();
  if (!(model.spinup_duration > 0.0)) {
    throw InvalidParameterError("spinup_duration must be positive");
  }
  if (observation.steps_per_cycle < 1) {
    throw InvalidParameterError("steps_per_cycle must be >= 1");
  }
  if (observation.resolution_stride < 1 ||
      observation.resolution_stride > model.dimension) {
    throw InvalidParameterError("resolution_stride must be in [1, N]");
  }
  if (!(observation.noise_std > 0.0)) {
    throw InvalidParameterError("observation noise_std must be positive");
  }
  if (filter.ensemble_size < 2) {
    throw DegenerateEnsembleError("ensemble_size must be >= 2");
  }
  if (run.rmse_window < 1 || run.n_cycles < run.rmse_window) {
    throw InvalidParameterError(
        "need n_cycles >= rmse_window >= 1 for the time-averaged RMSE");
  }
}

std::vector<Eigen::VectorXd> make_observations(
    const std::vector<StateVector>& truth, const ObservationSetup& setup,
    std::uint64_t seed) {
  if (truth.empty()) {
    throw InvalidParameterError("truth trajectory is empty");
  }
  setup.validate(static_cast<int>(truth.front().size()));
  std::vector<Eigen::VectorXd> observations;
  observations.reserve(truth.size());
  for (std::size_t j = 0; j < truth.size(); ++j) {
    Eigen::VectorXd y(setup.size());
    for (int i = 0; i < setup.size(); ++i) {
      y[i] = truth[j][setup.observed_indices[static_cast<std::size_t>(i)]] +
             setup.noise_std[i] *
                 counter_gaussian(seed, RandomStream::kObservationNoise, j,
                                  static_cast<std::uint32_t>(i));
    }
    observations.push_back(std::move(y));
  }
  return observations;
}

Ensemble initial_ensemble(const StateVector& truth0, int size, double spread,
                          std::uint64_t seed) {
  if (size < 2) {
    throw DegenerateEnsembleError("initial ensemble needs at least 2 members");
  }
  if (!(spread > 0.0)) {
    throw DegenerateEnsembleError("initial ensemble spread must be positive");
  }
  Eigen::MatrixXd members(truth0.size(), size);
  for (int k = 0; k < size; ++k) {
    for (Eigen::Index i = 0; i < truth0.size(); ++i) {
      members(i, k) =
          truth0[i] + spread * counter_gaussian(
                                   seed, RandomStream::kInitialEnsemble,
                                   static_cast<std::uint64_t>(k),
                                   static_cast<std::uint32_t>(i));
    }
  }
  return Ensemble(std::move(members));
}

ExperimentResult run_twin_experiment(const ExperimentConfig& config) {
  return run_cycles(config, nullptr);
}

TuneResult semi_joint_tune(const ExperimentConfig& base,
                           const std::vector<double>& rho_grid,
                           const std::vector<double>& c_grid,
                           const std::vector<double>& sigma_grid, int jobs) {
  if (rho_grid.empty() || c_grid.empty() || sigma_grid.empty()) {
    throw InvalidParameterError("tuning grids must be nonempty");
  }

  using Key = std::tuple<double, double, double>;
  std::map<Key, TuningCell> evaluated;
  std::vector<Key> order;

  auto evaluate_batch = [&](const std::vector<Key>& batch) {
    std::vector<Key> fresh;
    for (const Key& key : batch) {
      if (evaluated.find(key) == evaluated.end()) fresh.push_back(key);
    }
    std::vector<TuningCell> cells(fresh.size());
    detail::parallel_for(jobs, static_cast<int>(fresh.size()), [&](int i) {
      const auto& [rho, c, sigma] = fresh[static_cast<std::size_t>(i)];
      ExperimentConfig config = base;
      config.filter.rho = rho;
      config.filter.c = c;
      config.filter.sigma = sigma;
      const ExperimentResult result = run_twin_experiment(config);
      cells[static_cast<std::size_t>(i)] =
          TuningCell{rho, c, sigma, result.time_averaged_rmse, result.diverged};
    });
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      evaluated[fresh[i]] = cells[i];
      order.push_back(fresh[i]);
    }
  };

  // Lowest RMSE among completed cells; when every cell in the batch
  // diverged, the least-bad partial RMSE anchors the next stage instead.
  // Ties resolve in scan order.
  auto best_of = [&](const std::vector<Key>& keys) -> const TuningCell* {
    const TuningCell* best = nullptr;
    auto better = [](const TuningCell& cell, const TuningCell* incumbent) {
      if (incumbent == nullptr) return true;
      if (cell.diverged != incumbent->diverged) return !cell.diverged;
      if (std::isnan(cell.rmse)) return false;
      return std::isnan(incumbent->rmse) || cell.rmse < incumbent->rmse;
    };
    for (const Key& key : keys) {
      const TuningCell& cell = evaluated.at(key);
      if (better(cell, best)) best = &cell;
    }
    return best;
  };

  auto grid_keys = [&](double sigma) {
    std::vector<Key> keys;
    for (double rho : rho_grid) {
      for (double c : c_grid) keys.emplace_back(rho, c, sigma);
    }
    return keys;
  };

  auto collect_cells = [&]() {
    std::vector<TuningCell> cells;
    cells.reserve(order.size());
    for (const Key& key : order) cells.push_back(evaluated.at(key));
    return cells;
  };

  TuneResult result;

  // Stage 1: inflation and localization with smoothing disabled. A fully
  // diverged stage still anchors the kernel-width search at its least-bad
  // cell; the tune as a whole fails only when no cell anywhere completes.
  const std::vector<Key> stage1 = grid_keys(0.0);
  evaluate_batch(stage1);
  const TuningCell anchor1 = *best_of(stage1);

  // Stage 2: kernel width at the stage-1 optimum.
  std::vector<Key> stage2;
  for (double sigma : sigma_grid) {
    stage2.emplace_back(anchor1.rho, anchor1.c, sigma);
  }
  evaluate_batch(stage2);
  const TuningCell anchor2 = *best_of(stage2);

  // Stage 3: inflation and localization again at the chosen kernel width.
  const std::vector<Key> stage3 = grid_keys(anchor2.sigma);
  evaluate_batch(stage3);

  const TuningCell* best = nullptr;
  for (const Key& key : order) {
    const TuningCell& cell = evaluated.at(key);
    if (cell.diverged) continue;
    if (best == nullptr || cell.rmse < best->rmse) best = &cell;
  }
  result.cells = collect_cells();
  if (best == nullptr) {
    result.message = "every evaluated cell diverged";
    return result;
  }
  result.success = true;
  result.best = base.filter;
  result.best.rho = best->rho;
  result.best.c = best->c;
  result.best.sigma = best->sigma;
  result.best_rmse = best->rmse;
  return result;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> covariance_ratios(
    const Eigen::MatrixXd& before, const Eigen::MatrixXd& after) {
  if (before.rows() != before.cols() || before.rows() != after.rows() ||
      before.cols() != after.cols()) {
    throw ShapeError("covariance_ratios needs two square matrices of equal size");
  }
  const int n = static_cast<int>(before.rows());
  Eigen::VectorXd variance_ratio(n);
  Eigen::VectorXd offdiag_ratio(n);
  for (int i = 0; i < n; ++i) {
    const int next = (i + 1) % n;
    variance_ratio[i] = before(i, i) == 0.0
                            ? std::numeric_limits<double>::quiet_NaN()
                            : after(i, i) / before(i, i);
    offdiag_ratio[i] = before(i, next) == 0.0
                           ? std::numeric_limits<double>::quiet_NaN()
                           : after(i, next) / before(i, next);
  }
  return {std::move(variance_ratio), std::move(offdiag_ratio)};
}

DiagnosticsResult smoothing_diagnostics(
    const ExperimentConfig& config, const std::vector<double>& snapshot_times) {
  const double cycle_time = config.cycle_time();
  std::map<int, double> snapshot_cycles;
  for (double time : snapshot_times) {
    const double cycles = time / cycle_time;
    const int cycle = static_cast<int>(std::lround(cycles));
    if (std::abs(cycles - cycle) > 1e-9 || cycle < 1 ||
        cycle > config.run.n_cycles) {
      throw InvalidParameterError(
          "snapshot time " + std::to_string(time) +
          " does not fall on an assimilation cycle");
    }
    snapshot_cycles.emplace(cycle, time);
  }

  const SmoothingKernel kernel = gaussian_kernel(
      config.filter.sigma, default_truncation_radius(config.filter.sigma));

  DiagnosticsResult diagnostics;
  auto on_prior = [&](int cycle, const Ensemble& prior) {
    const auto found = snapshot_cycles.find(cycle);
    if (found == snapshot_cycles.end()) return;

    // Before/after comparison carries no inflation and no localization.
    const Eigen::MatrixXd before = decompose(prior).covariance();
    const Eigen::MatrixXd after =
        decompose(apply_spectrum_smoothing(prior, kernel)).covariance();
    auto [variance_ratio, offdiag_ratio] = covariance_ratios(before, after);
    diagnostics.snapshot_times.push_back(found->second);
    diagnostics.variance_ratio.push_back(std::move(variance_ratio));
    diagnostics.offdiag_ratio.push_back(std::move(offdiag_ratio));
  };

  run_cycles(config, on_prior);
  return diagnostics;
}

std::vector<SpectrumStudyEntry> free_run_spectrum_study(
    const ExperimentConfig& config, const std::vector<int>& sizes,
    bool with_smoothing, double free_run_time, int jobs) {
  if (sizes.empty()) {
    throw InvalidParameterError("spectrum study needs at least one size");
  }
  if (!(free_run_time > 0.0)) {
    throw InvalidParameterError("free run time must be positive");
  }
  const ModelParams params = config.model_params();
  const StateVector truth0 = spin_up(params, config.model.spinup_perturbation,
                                     config.model.spinup_duration);
  const long steps = std::lround(free_run_time / params.dt);
  const SmoothingKernel kernel = gaussian_kernel(
      config.filter.sigma, default_truncation_radius(config.filter.sigma));

  std::vector<SpectrumStudyEntry> entries;
  for (int size : sizes) {
    Ensemble ensemble = initial_ensemble(
        truth0, size, config.observation.noise_std, config.run.seed);
    ensemble = propagate(ensemble, params, static_cast<int>(steps), jobs);
    SpectrumStudyEntry entry;
    entry.ensemble_size = size;
    entry.raw = mean_power_spectrum(ensemble);
    if (with_smoothing) {
      entry.smoothed =
          mean_power_spectrum(apply_spectrum_smoothing(ensemble, kernel));
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace specda
