/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

// End-to-end acceptance suite. Each criterion prints one [PASS]/[FAIL] line;
// the process exits nonzero if any requested criterion fails. Run a single
// criterion with --criterion N (1..9).

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "specda/ensemble.hpp"
#include "specda/experiment.hpp"
#include "specda/filter.hpp"
#include "specda/model.hpp"
#include "specda/spectral.hpp"
#include "test_helpers.hpp"

namespace {

using namespace specda;
namespace helpers = specda::testing;

int worker_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 4u));
}

// ---------------------------------------------------------------------------
// Tuning protocol shared by the regime criteria: one semi-joint sweep per
// table cell (its sigma = 0 stage doubles as the baseline tuning), then both
// tuned methods are re-run on three evaluation seeds. Diverged evaluations
// contribute their partial time-averaged RMSE (or +inf when no cycle
// completed), so a filter that loses the truth scores honestly badly.

constexpr std::uint64_t kTuneSeed = 7;
constexpr std::uint64_t kEvalSeeds[3] = {11, 12, 13};

struct RegimeGrids {
  std::vector<double> rho;
  std::vector<double> c;
  std::vector<double> sigma;
};

RegimeGrids standard_grids() {
  return {{1.0, 1.02, 1.05, 1.1}, {2.0, 4.0, 6.0, 8.0}, {0.2, 0.3, 0.5, 1.0}};
}

RegimeGrids weak_turbulence_grids() {
  return {{1.0, 1.02, 1.05}, {2.0, 4.0, 8.0}, {0.2, 0.3, 0.5}};
}

ExperimentConfig regime_config(double forcing, double noise_std, int stride,
                               int ensemble_size) {
  ExperimentConfig config;
  config.model.forcing = forcing;
  config.observation.resolution_stride = stride;
  config.observation.noise_std = noise_std;
  config.filter.ensemble_size = ensemble_size;
  config.filter.mode = SmoothingMode::kPerturbation;
  config.run.seed = kTuneSeed;
  return config;
}

double comparison_rmse(const ExperimentResult& result) {
  if (!std::isfinite(result.time_averaged_rmse)) {
    return std::numeric_limits<double>::infinity();
  }
  return result.time_averaged_rmse;
}

double median_rmse(const ExperimentConfig& base, double rho, double c,
                   double sigma) {
  std::vector<double> values;
  for (const std::uint64_t seed : kEvalSeeds) {
    ExperimentConfig config = base;
    config.filter.rho = rho;
    config.filter.c = c;
    config.filter.sigma = sigma;
    config.run.seed = seed;
    values.push_back(comparison_rmse(run_twin_experiment(config)));
  }
  std::sort(values.begin(), values.end());
  return values[1];
}

struct CellComparison {
  double baseline_median = std::numeric_limits<double>::infinity();
  double smoothing_median = std::numeric_limits<double>::infinity();
  bool tuned = false;
};

CellComparison compare_methods(const ExperimentConfig& base,
                               const RegimeGrids& grids) {
  CellComparison out;
  const TuneResult tuned =
      semi_joint_tune(base, grids.rho, grids.c, grids.sigma, worker_threads());

  // The sigma = 0 stage is exactly the baseline tuning; prefer completed
  // cells and fall back to the least-bad partial RMSE when every cell
  // diverged on the tuning seed.
  const TuningCell* baseline = nullptr;
  for (const TuningCell& cell : tuned.cells) {
    if (cell.sigma != 0.0) continue;
    if (baseline == nullptr) {
      baseline = &cell;
      continue;
    }
    const bool better_status = !cell.diverged && baseline->diverged;
    const bool same_status = cell.diverged == baseline->diverged;
    if (better_status || (same_status && cell.rmse < baseline->rmse)) {
      baseline = &cell;
    }
  }
  if (baseline == nullptr) return out;

  out.baseline_median = median_rmse(base, baseline->rho, baseline->c, 0.0);
  if (tuned.success) {
    out.smoothing_median =
        median_rmse(base, tuned.best.rho, tuned.best.c, tuned.best.sigma);
  } else {
    out.smoothing_median = out.baseline_median;
  }
  out.tuned = true;
  return out;
}

// ---------------------------------------------------------------------------
// Criteria. Each returns true on success and appends details to the report.

bool scalar_kalman_oracle(std::ostream& report) {
  Eigen::MatrixXd members(1, 2);
  members << 1.0, -1.0;
  ObservationSetup setup;
  setup.observed_indices = {0};
  setup.noise_std = Eigen::VectorXd::Constant(1, std::sqrt(2.0));
  Eigen::VectorXd y(1);
  y << 2.0;
  const Ensemble posterior = etkf_assimilate(
      Ensemble(members), y, setup,
      LocalizationMatrix{Eigen::MatrixXd::Ones(1, 1)});
  const EnsembleStats stats = decompose(posterior);
  const double mean_error = std::abs(stats.mean[0] - 1.0);
  const double var_error = std::abs(stats.covariance()(0, 0) - 1.0);
  report << "mean err " << mean_error << ", var err " << var_error;
  return mean_error <= 1e-10 && var_error <= 1e-10;
}

bool small_dense_equivalence(std::ostream& report) {
  std::mt19937 rng(2026);
  std::uniform_int_distribution<int> dim_dist(1, 3);
  std::uniform_int_distribution<int> size_dist(2, 4);
  std::uniform_real_distribution<double> noise_dist(0.2, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dim_dist(rng);
    const int m = std::min(n, dim_dist(rng));
    const int k = size_dist(rng);
    Eigen::MatrixXd members(n, k);
    for (int col = 0; col < k; ++col) {
      for (int row = 0; row < n; ++row) {
        members(row, col) = 2.0 * normal(rng);
      }
    }
    std::vector<int> indices;
    for (int i = 0; i < m; ++i) indices.push_back(i);
    ObservationSetup setup;
    setup.observed_indices = indices;
    setup.noise_std = Eigen::VectorXd::Constant(m, noise_dist(rng));
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) y[i] = 3.0 * normal(rng);

    const Ensemble prior(members);
    const EnsembleStats stats = decompose(prior);
    const auto oracle = helpers::dense_kalman_update(
        stats.mean, stats.covariance(),
        helpers::dense_observation_matrix(n, indices),
        Eigen::MatrixXd(setup.noise_std.cwiseAbs2().asDiagonal()), y);

    const Ensemble posterior = etkf_assimilate(
        prior, y, setup, LocalizationMatrix{Eigen::MatrixXd::Ones(n, n)});
    const EnsembleStats post = decompose(posterior);
    worst = std::max(worst, helpers::max_relative_error(post.mean, oracle.mean));
    worst = std::max(worst, helpers::max_relative_error(post.covariance(),
                                                        oracle.covariance));
  }
  report << "worst relative error " << worst << " over 100 instances";
  return worst <= 1e-8;
}

bool spectrum_targeting_property(std::ostream& report) {
  std::mt19937 rng(515);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> sigma_dist(0.1, 1.0);
  const int sizes[3] = {10, 20, 40};

  double worst_mean = 0.0;
  double worst_bin = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 128;
    const int k = sizes[trial % 3];
    Eigen::MatrixXd members(n, k);
    for (int col = 0; col < k; ++col) {
      for (int row = 0; row < n; ++row) {
        members(row, col) = 3.0 * normal(rng) + normal(rng);
      }
    }
    const Ensemble ensemble(members);
    const double sigma = sigma_dist(rng);
    const SmoothingKernel kernel =
        gaussian_kernel(sigma, default_truncation_radius(sigma));

    const EnsembleStats stats = decompose(ensemble);
    const SpectrumProfile ensemble_spectrum = mean_power_spectrum(ensemble);
    const SpectrumProfile mean_field = power_spectrum(stats.mean);
    const SpectrumProfile target =
        clamped_smooth(ensemble_spectrum, mean_field, kernel);

    Eigen::VectorXd pert_power = Eigen::VectorXd::Zero(n);
    for (int col = 0; col < k; ++col) {
      const StateVector anomaly = ensemble.member(col) - stats.mean;
      pert_power += forward_transform(anomaly).cwiseAbs2();
    }
    pert_power /= static_cast<double>(k);
    const double floor = 1e-14 * pert_power.maxCoeff();

    const Ensemble updated = apply_spectrum_smoothing(ensemble, kernel);
    worst_mean = std::max(
        worst_mean,
        helpers::max_relative_error(decompose(updated).mean, stats.mean));

    const SpectrumProfile achieved = mean_power_spectrum(updated);
    for (int w = 0; w < n; ++w) {
      const int mirrored = std::min(w, n - w);
      // Degenerate bins are exempt from targeting but must stay unchanged.
      const double reference = pert_power[mirrored] <= floor
                                   ? ensemble_spectrum.power[w]
                                   : target.power[w];
      worst_bin = std::max(worst_bin,
                           std::abs(achieved.power[w] - reference) /
                               std::max(std::abs(reference), 1e-300));
    }
  }
  report << "worst mean-preservation error " << worst_mean
         << ", worst per-bin spectrum error " << worst_bin;
  return worst_mean <= 1e-10 && worst_bin <= 1e-8;
}

double total_variation(const Eigen::VectorXd& power) {
  double tv = 0.0;
  for (int w = 1; w <= static_cast<int>(power.size()) / 2; ++w) {
    tv += std::abs(power[w] - power[w - 1]);
  }
  return tv;
}

bool freerun_roughness(std::ostream& report) {
  ExperimentConfig config;
  config.model.forcing = 8.0;
  config.observation.noise_std = 0.364;
  config.filter.sigma = 0.5;
  config.run.seed = kTuneSeed;
  const auto entries =
      free_run_spectrum_study(config, {20, 1000}, true, 48.8, worker_threads());

  const double reference = total_variation(entries[1].raw.power);
  const double before = total_variation(entries[0].raw.power);
  const double after = total_variation(entries[0].smoothed->power);
  report << "roughness distance to large-ensemble reference: before "
         << std::abs(before - reference) << ", after "
         << std::abs(after - reference);
  return std::abs(after - reference) < std::abs(before - reference);
}

bool moderate_regime_bands(std::ostream& report) {
  const RegimeGrids grids = standard_grids();

  const CellComparison half = compare_methods(
      regime_config(8.0, 0.364, /*stride=*/2, /*K=*/20), grids);
  const CellComparison full = compare_methods(
      regime_config(8.0, 0.364, /*stride=*/1, /*K=*/40), grids);

  report << "50% K=20: baseline " << half.baseline_median << " (need > 2), "
         << "smoothing " << half.smoothing_median << " (need < 0.5); "
         << "100% K=40: baseline " << full.baseline_median
         << ", smoothing " << full.smoothing_median << " (both < 0.2)";
  return half.tuned && full.tuned && half.smoothing_median < 0.5 &&
         half.baseline_median > 2.0 && full.baseline_median < 0.2 &&
         full.smoothing_median < 0.2;
}

bool strong_regime_dominance(std::ostream& report) {
  const RegimeGrids grids = standard_grids();
  bool all_dominated = true;
  for (const int ensemble_size : {10, 20}) {
    for (const int stride : {4, 3, 2, 1}) {
      const CellComparison cell = compare_methods(
          regime_config(16.0, 0.6298, stride, ensemble_size), grids);
      const bool dominated =
          cell.tuned && cell.smoothing_median < cell.baseline_median;
      all_dominated = all_dominated && dominated;
      report << "[K=" << ensemble_size << " stride=" << stride << ": "
             << cell.smoothing_median << (dominated ? " < " : " !< ")
             << cell.baseline_median << "] ";
    }
  }
  return all_dominated;
}

bool weak_regime_parity(std::ostream& report) {
  const RegimeGrids grids = weak_turbulence_grids();
  bool all_close = true;
  for (const int ensemble_size : {10, 20, 30}) {
    for (const int stride : {4, 3, 2, 1}) {
      const CellComparison cell = compare_methods(
          regime_config(4.0, 0.1854, stride, ensemble_size), grids);
      const double gap =
          std::abs(cell.smoothing_median - cell.baseline_median);
      const bool close = cell.tuned && gap <= 0.005;
      all_close = all_close && close;
      report << "[K=" << ensemble_size << " stride=" << stride << ": |"
             << cell.smoothing_median << " - " << cell.baseline_median
             << "| = " << gap << (close ? "" : " TOO WIDE") << "] ";
    }
  }
  return all_close;
}

bool diagnostics_nonuniformity(std::ostream& report) {
  ExperimentConfig config = regime_config(8.0, 0.364, /*stride=*/2, /*K=*/20);
  config.filter.rho = 1.05;
  config.filter.c = 4.0;
  config.filter.sigma = 0.3;
  const DiagnosticsResult diagnostics =
      smoothing_diagnostics(config, {45.0, 90.0, 135.0, 180.0});
  if (diagnostics.snapshot_times.size() != 4) {
    report << "expected 4 snapshots, got " << diagnostics.snapshot_times.size();
    return false;
  }

  bool ok = true;
  for (std::size_t s = 0; s < 4; ++s) {
    const Eigen::VectorXd& variance = diagnostics.variance_ratio[s];
    const Eigen::VectorXd& offdiag = diagnostics.offdiag_ratio[s];
    if (!variance.allFinite() || !offdiag.allFinite()) {
      report << "[t=" << diagnostics.snapshot_times[s] << ": undefined ratios] ";
      ok = false;
      continue;
    }
    const double mean = variance.mean();
    const double cv =
        std::sqrt((variance.array() - mean).square().mean()) / mean;
    const double cosine =
        variance.dot(offdiag) / (variance.norm() * offdiag.norm());
    const double cosine_distance = 1.0 - cosine;
    report << "[t=" << diagnostics.snapshot_times[s] << ": cv " << cv
           << ", cos-dist " << cosine_distance << "] ";
    ok = ok && cv > 0.01 && cosine_distance > 0.01;
  }
  return ok;
}

bool invariant_suite(std::ostream& report) {
  bool ok = true;

  // Fixed-point invariance, bitwise.
  {
    const ModelParams params{64, 8.0, 0.01};
    const StateVector fixed_point = StateVector::Constant(64, 8.0);
    const StateVector stepped = rk4_step(fixed_point, params);
    const bool exact = (stepped.array() == fixed_point.array()).all();
    report << "fixed-point " << (exact ? "exact" : "violated") << "; ";
    ok = ok && exact;
  }

  // Fourth-order convergence under step halving.
  {
    const ModelParams coarse{128, 8.0, 0.01};
    const StateVector start = spin_up(coarse, 1e-3, 30.0);
    auto integrate = [&](double dt) {
      Lorenz96Integrator integrator(ModelParams{128, 8.0, dt});
      StateVector state = start;
      integrator.advance(state, std::lround(0.3 / dt));
      return state;
    };
    const StateVector u1 = integrate(0.01);
    const StateVector u2 = integrate(0.005);
    const StateVector u4 = integrate(0.0025);
    const double ratio = (u1 - u2).norm() / (u2 - u4).norm();
    report << "step-halving ratio " << ratio << "; ";
    ok = ok && ratio >= 12.0;
  }

  // Taper polynomial values.
  {
    const double at_zero = gaspari_cohn(0.0, 3.0);
    const double at_halfwidth = gaspari_cohn(3.0, 3.0);
    const double at_support = gaspari_cohn(6.0, 3.0);
    report << "taper(0) = " << at_zero << ", taper(c) = " << at_halfwidth
           << ", taper(2c) = " << at_support << "; ";
    ok = ok && at_zero == 1.0 &&
         std::abs(at_halfwidth - 5.0 / 24.0) <= 1e-12 && at_support == 0.0;
  }

  // Multiplicative inflation scales the covariance by exactly rho.
  {
    const Ensemble ensemble = helpers::random_ensemble(16, 8, 3);
    const double rho = 1.07;
    const Eigen::MatrixXd before = decompose(ensemble).covariance();
    const Eigen::MatrixXd after =
        decompose(inflate(ensemble, rho)).covariance();
    const double error =
        helpers::max_relative_error(after, Eigen::MatrixXd(rho * before));
    report << "inflation scaling error " << error << "; ";
    ok = ok && error <= 1e-13;
  }

  // Worker-count invariance of the tuning sweep.
  {
    ExperimentConfig config = regime_config(8.0, 0.364, 2, 6);
    config.model.dimension = 16;
    config.model.spinup_duration = 10.0;
    config.run.n_cycles = 30;
    config.run.rmse_window = 10;
    const std::vector<double> rho_grid = {1.0, 1.05};
    const std::vector<double> c_grid = {2.0, 4.0};
    const std::vector<double> sigma_grid = {0.0, 0.3};
    const TuneResult serial =
        semi_joint_tune(config, rho_grid, c_grid, sigma_grid, 1);
    const TuneResult threaded =
        semi_joint_tune(config, rho_grid, c_grid, sigma_grid, 3);
    bool identical = serial.cells.size() == threaded.cells.size() &&
                     serial.best.rho == threaded.best.rho &&
                     serial.best.c == threaded.best.c &&
                     serial.best.sigma == threaded.best.sigma;
    for (std::size_t i = 0; identical && i < serial.cells.size(); ++i) {
      identical = serial.cells[i].rmse == threaded.cells[i].rmse &&
                  serial.cells[i].rho == threaded.cells[i].rho &&
                  serial.cells[i].c == threaded.cells[i].c &&
                  serial.cells[i].sigma == threaded.cells[i].sigma;
    }
    report << "worker-count invariance "
           << (identical ? "bitwise" : "violated");
    ok = ok && identical;
  }

  return ok;
}

struct Criterion {
  int number;
  const char* name;
  std::function<bool(std::ostream&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "scalar Kalman oracle", scalar_kalman_oracle},
      {2, "small-instance dense-update equivalence", small_dense_equivalence},
      {3, "spectrum-targeting property", spectrum_targeting_property},
      {4, "free-run roughness moves toward the large-ensemble reference",
       freerun_roughness},
      {5, "moderate-turbulence regime bands", moderate_regime_bands},
      {6, "strong-turbulence smoothing dominance", strong_regime_dominance},
      {7, "weak-turbulence method parity", weak_regime_parity},
      {8, "inhomogeneous inflation/localization diagnostics",
       diagnostics_nonuniformity},
      {9, "invariant suite", invariant_suite},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected = std::atoi(argv[i + 1]);
      ++i;
    } else if (std::strcmp(argv[i], "--list") == 0) {
      for (const Criterion& criterion : criteria()) {
        std::cout << criterion.number << ": " << criterion.name << "\n";
      }
      return 0;
    } else {
      std::cerr << "usage: acceptance_tests [--criterion N] [--list]\n";
      return 2;
    }
  }

  bool all_passed = true;
  bool any_ran = false;
  for (const Criterion& criterion : criteria()) {
    if (selected != 0 && criterion.number != selected) continue;
    any_ran = true;
    std::ostringstream report;
    bool passed = false;
    try {
      passed = criterion.run(report);
    } catch (const std::exception& e) {
      report << "exception: " << e.what();
    }
    std::cout << (passed ? "[PASS]" : "[FAIL]") << " criterion "
              << criterion.number << " (" << criterion.name
              << "): " << report.str() << std::endl;
    all_passed = all_passed && passed;
  }
  if (!any_ran) {
    std::cerr << "no such criterion: " << selected << "\n";
    return 2;
  }
  return all_passed ? 0 : 1;
}
