/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "specda/ensemble.hpp"
#include "specda/spectral.hpp"

namespace specda {

/// Subsampling observation operator plus diagonal Gaussian noise model. Zero
/// noise entries are allowed for noise-free observation generation;
/// assimilation requires strictly positive noise.
struct ObservationSetup {
  std::vector<int> observed_indices;  ///< strictly increasing state indices
  Eigen::VectorXd noise_std;          ///< per-observation std, all >= 0

  int size() const { return static_cast<int>(observed_indices.size()); }

  /// Checks the invariants against a state dimension.
  void validate(int state_dimension) const;
};

/// Observes every `stride`-th component starting at index 0, with a common
/// noise standard deviation.
ObservationSetup strided_observations(int state_dimension, int stride,
                                      double noise_std);

/// How the spectrum-smoothing update is applied before assimilation.
enum class SmoothingMode {
  kOff,            ///< classic ETKF
  kPerturbation,   ///< rescale perturbation coefficients, mean preserved
  kWholeEnsemble,  ///< rescale full member coefficients, mean changes
};

std::string to_string(SmoothingMode mode);
SmoothingMode smoothing_mode_from_string(const std::string& name);

/// Assimilation-step parameters: multiplicative inflation rho >= 1,
/// Gaspari-Cohn halfwidth c > 0, smoothing kernel width sigma >= 0, and the
/// smoothing mode. additive_inflation >= 0 adds to the covariance diagonal
/// used by the gain; it defaults to 0 and is off in the standard experiments.
struct FilterConfig {
  double inflation = 1.0;
  double localization_halfwidth = 4.0;
  double smoothing_sigma = 0.0;
  SmoothingMode mode = SmoothingMode::kOff;
  double additive_inflation = 0.0;

  void validate() const;
};

/// Entrywise covariance taper; L_ij depends only on the periodic grid
/// distance between i and j, with ones on the diagonal.
struct LocalizationMatrix {
  Eigen::MatrixXd taper;
};

/// Fifth-order piecewise rational Gaspari-Cohn correlation function with
/// support radius 2c. Throws InvalidParameterError for c <= 0 or a negative
/// distance.
double gaspari_cohn(double distance, double halfwidth);

/// L_ij = gaspari_cohn(min(|i-j|, N-|i-j|), c).
LocalizationMatrix localization_matrix(int dimension, double halfwidth);

/// Multiplicative inflation: member -> mean + sqrt(rho) * (member - mean),
/// scaling the sample covariance by exactly rho. rho == 1 is the identity.
Ensemble inflate(const Ensemble& ensemble, double rho);

/// Symmetric square root of a symmetric positive semidefinite matrix via
/// eigendecomposition. Eigenvalues in [-1e-10, 0) are clipped to zero; below
/// that a SymmetryError is thrown.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& matrix);

/// One ETKF assimilation step:
///   - gain from the tapered covariance L .* C_hat (plus any additive
///     inflation on its diagonal),
///   - posterior mean = prior mean + gain * innovation,
///   - perturbation transform T = [I + (HX)^T Gamma^-1 (HX)]^-1 from the
///     untapered perturbations, applied through its symmetric square root.
Ensemble etkf_assimilate(const Ensemble& prior,
                         const Eigen::VectorXd& observation,
                         const ObservationSetup& setup,
                         const LocalizationMatrix& localization,
                         double additive_inflation = 0.0);

/// Full assimilation step in order: spectrum smoothing (per mode), then
/// multiplicative inflation, then the localized ETKF update. A zero sigma or
/// mode kOff skips the smoothing stage exactly.
Ensemble assimilation_cycle(const Ensemble& prior,
                            const Eigen::VectorXd& observation,
                            const ObservationSetup& setup,
                            const FilterConfig& config,
                            const LocalizationMatrix& localization,
                            const SmoothingKernel& kernel);

/// Convenience overload building the localization matrix and kernel from the
/// config. Prefer the precomputed overload inside cycle loops.
Ensemble assimilation_cycle(const Ensemble& prior,
                            const Eigen::VectorXd& observation,
                            const ObservationSetup& setup,
                            const FilterConfig& config);

}  // namespace specda
