/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "specda/filter.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "specda/errors.hpp"

namespace specda {

namespace {

constexpr double kConditionWarnThreshold = 1e12;
constexpr double kSqrtEigenvalueFloor = -1e-10;

// Rows of a matrix at the observed indices (the action of H).
Eigen::MatrixXd observe_rows(const Eigen::MatrixXd& matrix,
                             const std::vector<int>& indices) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()),
                      matrix.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = matrix.row(indices[i]);
  }
  return out;
}

Eigen::VectorXd observe_entries(const Eigen::VectorXd& vector,
                                const std::vector<int>& indices) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = vector[indices[i]];
  }
  return out;
}

}  // namespace

void ObservationSetup::validate(int state_dimension) const {
  if (observed_indices.empty() ||
      static_cast<int>(observed_indices.size()) > state_dimension) {
    throw InvalidParameterError("observation count must be in [1, N]");
  }
  int previous = -1;
  for (int index : observed_indices) {
    if (index <= previous || index >= state_dimension) {
      throw InvalidParameterError(
          "observed indices must be strictly increasing and in range");
    }
    previous = index;
  }
  if (noise_std.size() != static_cast<Eigen::Index>(observed_indices.size())) {
    throw ShapeError("noise_std length must match the observed index count");
  }
  if ((noise_std.array() < 0.0).any() || !noise_std.allFinite()) {
    throw InvalidParameterError("observation noise std must be nonnegative");
  }
}

ObservationSetup strided_observations(int state_dimension, int stride,
                                      double noise_std) {
  if (stride < 1) {
    throw InvalidParameterError("observation stride must be >= 1");
  }
  ObservationSetup setup;
  for (int i = 0; i < state_dimension; i += stride) {
    setup.observed_indices.push_back(i);
  }
  setup.noise_std = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(setup.observed_indices.size()), noise_std);
  setup.validate(state_dimension);
  return setup;
}

std::string to_string(SmoothingMode mode) {
  switch (mode) {
    case SmoothingMode::kOff:
      return "off";
    case SmoothingMode::kPerturbation:
      return "perturbation";
    case SmoothingMode::kWholeEnsemble:
      return "whole-ensemble";
  }
  return "off";
}

SmoothingMode smoothing_mode_from_string(const std::string& name) {
  if (name == "off") return SmoothingMode::kOff;
  if (name == "perturbation") return SmoothingMode::kPerturbation;
  if (name == "whole-ensemble") return SmoothingMode::kWholeEnsemble;
  throw InvalidParameterError("unknown smoothing mode '" + name +
                              "' (expected off, perturbation, or "
                              "whole-ensemble)");
}

void FilterConfig::validate() const {
  if (!(inflation >= 1.0)) {
    throw InvalidParameterError("multiplicative inflation must be >= 1");
  }
  if (!(localization_halfwidth > 0.0)) {
    throw InvalidParameterError("localization halfwidth must be positive");
  }
  if (smoothing_sigma < 0.0) {
    throw InvalidParameterError("smoothing sigma must be nonnegative");
  }
  if (additive_inflation < 0.0) {
    throw InvalidParameterError("additive inflation must be nonnegative");
  }
}

double gaspari_cohn(double distance, double halfwidth) {
  if (!(halfwidth > 0.0)) {
    throw InvalidParameterError("Gaspari-Cohn halfwidth must be positive");
  }
  if (distance < 0.0) {
    throw InvalidParameterError("distance must be nonnegative");
  }
  const double z = distance / halfwidth;
  if (z >= 2.0) return 0.0;
  if (z <= 1.0) {
    return ((((-0.25 * z + 0.5) * z + 0.625) * z - 5.0 / 3.0) * z) * z + 1.0;
  }
  return ((((z / 12.0 - 0.5) * z + 0.625) * z + 5.0 / 3.0) * z - 5.0) * z +
         4.0 - 2.0 / (3.0 * z);
}

LocalizationMatrix localization_matrix(int dimension, double halfwidth) {
  if (dimension < 1) {
    throw InvalidParameterError("localization dimension must be >= 1");
  }
  // Periodic distance only takes values 0..N/2; evaluate the taper once per
  // distance.
  std::vector<double> taper_by_distance(
      static_cast<std::size_t>(dimension / 2 + 1));
  for (int d = 0; d <= dimension / 2; ++d) {
    taper_by_distance[static_cast<std::size_t>(d)] =
        gaspari_cohn(static_cast<double>(d), halfwidth);
  }
  LocalizationMatrix localization;
  localization.taper.resize(dimension, dimension);
  for (int i = 0; i < dimension; ++i) {
    for (int j = 0; j < dimension; ++j) {
      const int offset = std::abs(i - j);
      const int distance = std::min(offset, dimension - offset);
      localization.taper(i, j) =
          taper_by_distance[static_cast<std::size_t>(distance)];
    }
  }
  return localization;
}

Ensemble inflate(const Ensemble& ensemble, double rho) {
  if (!(rho >= 1.0)) {
    throw InvalidParameterError("multiplicative inflation must be >= 1");
  }
  if (rho == 1.0) return ensemble;
  const StateVector mean = ensemble.members().rowwise().mean();
  Eigen::MatrixXd members =
      (std::sqrt(rho) * (ensemble.members().colwise() - mean)).colwise() +
      mean;
  return Ensemble(std::move(members));
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw ShapeError("symmetric_sqrt needs a square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailureError("eigendecomposition failed", 0.0);
  }
  Eigen::VectorXd eigenvalues = solver.eigenvalues();
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] < kSqrtEigenvalueFloor) {
      throw SymmetryError("matrix has eigenvalue " +
                          std::to_string(eigenvalues[i]) +
                          " below the positive-semidefinite tolerance");
    }
    eigenvalues[i] = std::max(eigenvalues[i], 0.0);
  }
  return solver.eigenvectors() *
         eigenvalues.cwiseSqrt().asDiagonal() *
         solver.eigenvectors().transpose();
}

Ensemble etkf_assimilate(const Ensemble& prior,
                         const Eigen::VectorXd& observation,
                         const ObservationSetup& setup,
                         const LocalizationMatrix& localization,
                         double additive_inflation) {
  const int n = prior.dimension();
  setup.validate(n);
  const int m = setup.size();
  if (observation.size() != m) {
    throw ShapeError("observation length does not match the setup");
  }
  if (localization.taper.rows() != n || localization.taper.cols() != n) {
    throw ShapeError("localization matrix must be N x N");
  }
  if (additive_inflation < 0.0) {
    throw InvalidParameterError("additive inflation must be nonnegative");
  }

  if ((setup.noise_std.array() <= 0.0).any()) {
    throw InvalidParameterError(
        "assimilation needs strictly positive observation noise");
  }

  const EnsembleStats stats = decompose(prior);
  const Eigen::MatrixXd& perturbations = stats.perturbations;

  // Tapered covariance for the gain; the transform below stays untapered.
  Eigen::MatrixXd covariance = stats.covariance();
  covariance.array() *= localization.taper.array();
  if (additive_inflation > 0.0) {
    covariance.diagonal().array() += additive_inflation;
  }

  const Eigen::MatrixXd covariance_obs_rows =
      observe_rows(covariance, setup.observed_indices);  // M x N
  Eigen::MatrixXd innovation_cov =
      observe_rows(covariance_obs_rows.transpose(), setup.observed_indices);
  innovation_cov.diagonal() += setup.noise_std.cwiseAbs2();

  const Eigen::LDLT<Eigen::MatrixXd> innovation_ldlt(innovation_cov);
  if (innovation_ldlt.info() != Eigen::Success) {
    throw NumericalFailureError("innovation covariance solve failed",
                                std::numeric_limits<double>::infinity());
  }
  const double rcond = innovation_ldlt.rcond();
  if (rcond <= 0.0) {
    throw NumericalFailureError("innovation covariance is singular",
                                std::numeric_limits<double>::infinity());
  }
  if (1.0 / rcond > kConditionWarnThreshold) {
    std::cerr << "specda: warning: innovation covariance condition estimate "
              << 1.0 / rcond << " exceeds " << kConditionWarnThreshold << "\n";
  }

  // gain^T = S^-1 (H C), so the mean update is mean + gain * innovation.
  const Eigen::MatrixXd gain_t = innovation_ldlt.solve(covariance_obs_rows);
  const Eigen::VectorXd innovation =
      observation - observe_entries(stats.mean, setup.observed_indices);
  const StateVector posterior_mean =
      stats.mean + gain_t.transpose() * innovation;

  // T = [I + (HX)^T Gamma^-1 (HX)]^-1 from the untapered perturbations.
  const Eigen::MatrixXd observed_perturbations =
      observe_rows(perturbations, setup.observed_indices);  // M x K
  const Eigen::VectorXd inv_noise_var = setup.noise_std.cwiseAbs2().cwiseInverse();
  const int k = prior.size();
  Eigen::MatrixXd t_inverse =
      Eigen::MatrixXd::Identity(k, k) +
      observed_perturbations.transpose() *
          inv_noise_var.asDiagonal() * observed_perturbations;
  const Eigen::LDLT<Eigen::MatrixXd> t_ldlt(t_inverse);
  if (t_ldlt.info() != Eigen::Success || t_ldlt.rcond() <= 0.0) {
    throw NumericalFailureError(
        "perturbation transform solve failed",
        t_ldlt.rcond() > 0.0 ? 1.0 / t_ldlt.rcond()
                             : std::numeric_limits<double>::infinity());
  }
  Eigen::MatrixXd transform = t_ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  transform = 0.5 * (transform + transform.transpose()).eval();
  const Eigen::MatrixXd transform_sqrt = symmetric_sqrt(transform);

  return recompose(posterior_mean, perturbations * transform_sqrt);
}

Ensemble assimilation_cycle(const Ensemble& prior,
                            const Eigen::VectorXd& observation,
                            const ObservationSetup& setup,
                            const FilterConfig& config,
                            const LocalizationMatrix& localization,
                            const SmoothingKernel& kernel) {
  config.validate();
  Ensemble ensemble = prior;
  if (config.mode != SmoothingMode::kOff && !kernel.is_delta()) {
    ensemble = config.mode == SmoothingMode::kPerturbation
                   ? apply_spectrum_smoothing(ensemble, kernel)
                   : apply_whole_ensemble_rescaling(ensemble, kernel);
  }
  ensemble = inflate(ensemble, config.inflation);
  return etkf_assimilate(ensemble, observation, setup, localization,
                         config.additive_inflation);
}

Ensemble assimilation_cycle(const Ensemble& prior,
                            const Eigen::VectorXd& observation,
                            const ObservationSetup& setup,
                            const FilterConfig& config) {
  const LocalizationMatrix localization =
      localization_matrix(prior.dimension(), config.localization_halfwidth);
  const SmoothingKernel kernel = gaussian_kernel(
      config.smoothing_sigma, default_truncation_radius(config.smoothing_sigma));
  return assimilation_cycle(prior, observation, setup, config, localization,
                            kernel);
}

}  // namespace specda
