/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <vector>

#include <Eigen/Core>

#include "specda/ensemble.hpp"
#include "specda/model.hpp"

namespace specda {

/// Per-wavenumber power values of a real field or an ensemble, indexed by the
/// integer DFT bin w in {0, ..., N-1}. Real inputs give conjugate-symmetric
/// profiles, power[w] = power[N-w].
struct SpectrumProfile {
  Eigen::VectorXd power;

  int size() const { return static_cast<int>(power.size()); }
};

/// Symmetric nonnegative convolution kernel over wavenumber offsets
/// -radius..radius, normalized to unit sum. sigma is kept for reporting.
struct SmoothingKernel {
  double sigma = 0.0;
  std::vector<double> weights;  ///< odd length 2*radius+1, centered at 0

  int radius() const { return static_cast<int>(weights.size() / 2); }
  bool is_delta() const { return weights.size() == 1; }
};

/// Per-wavenumber multiplicative factors applied to perturbation (or member)
/// Fourier coefficients. alpha[w] = alpha[N-w] holds exactly so rescaled
/// fields stay real.
struct RescalingFactors {
  Eigen::VectorXd alpha;
};

/// Unnormalized forward DFT, F[w] = sum_n u_n exp(-2*pi*i*n*w/N).
Eigen::VectorXcd forward_transform(const StateVector& state);

/// Inverse DFT with the 1/N factor; inverse_transform(forward_transform(u))
/// recovers u up to round-off.
Eigen::VectorXcd inverse_transform(const Eigen::VectorXcd& coefficients);

/// |F(u)[w]|^2 per wavenumber.
SpectrumProfile power_spectrum(const StateVector& state);

/// Mean power spectrum of an ensemble, (1/K) sum_k |F(u_k)[w]|^2, accumulated
/// in member order.
SpectrumProfile mean_power_spectrum(const Ensemble& ensemble);

/// Default kernel truncation radius max(1, ceil(4*sigma)); 0 when sigma == 0.
int default_truncation_radius(double sigma);

/// Gaussian kernel sampled at integer offsets |tau| <= truncation_radius and
/// normalized to unit sum. sigma == 0 yields the discrete delta. Throws
/// InvalidParameterError for negative arguments.
SmoothingKernel gaussian_kernel(double sigma, int truncation_radius);

/// Circular convolution of the power profile with the kernel over wavenumber
/// index mod N. Throws InvalidParameterError when the kernel is wider than N.
SpectrumProfile smooth_spectrum(const SpectrumProfile& spectrum,
                                const SmoothingKernel& kernel);

/// Smooths the ensemble spectrum and floors it, per bin, at the mean-field
/// spectrum, which keeps the rescaling radicand nonnegative.
SpectrumProfile clamped_smooth(const SpectrumProfile& ensemble_spectrum,
                               const SpectrumProfile& mean_field_spectrum,
                               const SmoothingKernel& kernel);

/// alpha[w] = sqrt((clamped[w] - mean_field[w]) / perturbation[w]). Bins whose
/// denominator falls below 1e-14 of the largest denominator bin get
/// alpha[w] = 1 (degenerate-bin rule). The result is mirrored from the lower
/// half so alpha[w] == alpha[N-w] exactly.
RescalingFactors rescaling_factors_from_spectra(
    const SpectrumProfile& clamped, const SpectrumProfile& mean_field,
    const SpectrumProfile& perturbation);

/// Rescaling factors for an ensemble under the given kernel.
RescalingFactors rescaling_factors(const Ensemble& ensemble,
                                   const SmoothingKernel& kernel);

/// Replaces each member by mean + invDFT(alpha .* DFT(member - mean)). The
/// ensemble mean is preserved and the output mean power spectrum matches the
/// clamped smoothed input spectrum (degenerate bins are left unchanged).
Ensemble apply_spectrum_smoothing(const Ensemble& ensemble,
                                  const SmoothingKernel& kernel);

/// Alternative update rescaling whole members instead of perturbations:
/// member_k -> invDFT(alpha~ .* DFT(member_k)). The ensemble mean generally
/// changes. Degenerate bins (zero total spectrum) get alpha~[w] = 1.
Ensemble apply_whole_ensemble_rescaling(const Ensemble& ensemble,
                                        const SmoothingKernel& kernel);

}  // namespace specda
