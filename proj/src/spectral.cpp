/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "specda/spectral.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "specda/errors.hpp"

namespace specda {

namespace {

// One FFTW plan pair per transform length, created once under a lock and
// executed through the new-array interface (plan creation is not thread safe,
// execution is). FFTW_UNALIGNED lets the plans run on arbitrary buffers.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

PlanPair plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, PlanPair> registry;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = registry.find(n);
  if (it != registry.end()) return it->second;

  fftw_complex* in = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n));
  PlanPair plans;
  plans.forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  registry[n] = plans;
  return plans;
}

Eigen::VectorXcd run_dft(const Eigen::VectorXcd& input, bool forward) {
  const int n = static_cast<int>(input.size());
  if (n < 1) {
    throw ShapeError("DFT input must be nonempty");
  }
  const PlanPair plans = plans_for(n);
  Eigen::VectorXcd output(n);
  auto* in = reinterpret_cast<fftw_complex*>(
      const_cast<std::complex<double>*>(input.data()));
  auto* out = reinterpret_cast<fftw_complex*>(output.data());
  fftw_execute_dft(forward ? plans.forward : plans.backward, in, out);
  return output;
}

SpectrumProfile magnitude_squared(const Eigen::VectorXcd& coefficients) {
  SpectrumProfile profile;
  profile.power = coefficients.cwiseAbs2();
  return profile;
}

void check_same_length(const SpectrumProfile& a, const SpectrumProfile& b,
                       const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": spectrum lengths differ (" +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
}

// Shared implementation of the two member-rescaling updates. `factors` is
// applied to the perturbation coefficients (mean re-added) or to the whole
// member coefficients. The imaginary residue left by the inverse transform is
// checked against the field scale before being dropped.
Ensemble rescale_members(const Ensemble& ensemble,
                         const Eigen::VectorXd& factors,
                         const StateVector* mean,
                         const std::vector<Eigen::VectorXcd>& coefficients) {
  const int n = ensemble.dimension();
  const int k = ensemble.size();
  const double field_scale = ensemble.members().cwiseAbs().maxCoeff();
  const double imag_tolerance = 1e-9 * field_scale;

  Eigen::MatrixXd out(n, k);
  for (int member = 0; member < k; ++member) {
    Eigen::VectorXcd scaled(n);
    for (int w = 0; w < n; ++w) scaled[w] = factors[w] * coefficients[member][w];
    const Eigen::VectorXcd field = inverse_transform(scaled);
    const double residue = field.imag().cwiseAbs().maxCoeff();
    if (residue > imag_tolerance) {
      throw NumericalFailureError(
          "rescaled member " + std::to_string(member) +
              " has imaginary residue above tolerance",
          residue / std::max(field_scale, 1e-300));
    }
    if (mean != nullptr) {
      out.col(member) = *mean + field.real();
    } else {
      out.col(member) = field.real();
    }
  }
  return Ensemble(std::move(out));
}

}  // namespace

Eigen::VectorXcd forward_transform(const StateVector& state) {
  return run_dft(state.cast<std::complex<double>>(), /*forward=*/true);
}

Eigen::VectorXcd inverse_transform(const Eigen::VectorXcd& coefficients) {
  Eigen::VectorXcd out = run_dft(coefficients, /*forward=*/false);
  out /= static_cast<double>(coefficients.size());
  return out;
}

SpectrumProfile power_spectrum(const StateVector& state) {
  return magnitude_squared(forward_transform(state));
}

SpectrumProfile mean_power_spectrum(const Ensemble& ensemble) {
  const int n = ensemble.dimension();
  Eigen::VectorXd accumulated = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < ensemble.size(); ++k) {
    accumulated += forward_transform(ensemble.member(k)).cwiseAbs2();
  }
  SpectrumProfile profile;
  profile.power = accumulated / static_cast<double>(ensemble.size());
  return profile;
}

int default_truncation_radius(double sigma) {
  if (sigma < 0.0) {
    throw InvalidParameterError("kernel sigma must be nonnegative");
  }
  if (sigma == 0.0) return 0;
  return std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
}

SmoothingKernel gaussian_kernel(double sigma, int truncation_radius) {
  if (sigma < 0.0) {
    throw InvalidParameterError("kernel sigma must be nonnegative");
  }
  if (truncation_radius < 0) {
    throw InvalidParameterError("kernel truncation radius must be >= 0");
  }
  SmoothingKernel kernel;
  kernel.sigma = sigma;
  if (sigma == 0.0 || truncation_radius == 0) {
    kernel.weights = {1.0};
    return kernel;
  }
  kernel.weights.resize(static_cast<std::size_t>(2 * truncation_radius + 1));
  double sum = 0.0;
  for (int tau = -truncation_radius; tau <= truncation_radius; ++tau) {
    const double w = std::exp(-0.5 * (tau / sigma) * (tau / sigma));
    kernel.weights[static_cast<std::size_t>(tau + truncation_radius)] = w;
    sum += w;
  }
  for (double& w : kernel.weights) w /= sum;
  return kernel;
}

SpectrumProfile smooth_spectrum(const SpectrumProfile& spectrum,
                                const SmoothingKernel& kernel) {
  const int n = spectrum.size();
  const int radius = kernel.radius();
  if (2 * radius + 1 > n) {
    throw InvalidParameterError("smoothing kernel is wider than the spectrum");
  }
  if (kernel.is_delta()) return spectrum;

  SpectrumProfile out;
  out.power.resize(n);
  for (int w = 0; w < n; ++w) {
    double value = 0.0;
    for (int tau = -radius; tau <= radius; ++tau) {
      int idx = (w - tau) % n;
      if (idx < 0) idx += n;
      value += kernel.weights[static_cast<std::size_t>(tau + radius)] *
               spectrum.power[idx];
    }
    out.power[w] = value;
  }
  return out;
}

SpectrumProfile clamped_smooth(const SpectrumProfile& ensemble_spectrum,
                               const SpectrumProfile& mean_field_spectrum,
                               const SmoothingKernel& kernel) {
  check_same_length(ensemble_spectrum, mean_field_spectrum, "clamped_smooth");
  SpectrumProfile smoothed = smooth_spectrum(ensemble_spectrum, kernel);
  smoothed.power = smoothed.power.cwiseMax(mean_field_spectrum.power);
  return smoothed;
}

RescalingFactors rescaling_factors_from_spectra(
    const SpectrumProfile& clamped, const SpectrumProfile& mean_field,
    const SpectrumProfile& perturbation) {
  check_same_length(clamped, mean_field, "rescaling_factors");
  check_same_length(clamped, perturbation, "rescaling_factors");
  const int n = clamped.size();
  const double denominator_floor = 1e-14 * perturbation.power.maxCoeff();

  RescalingFactors factors;
  factors.alpha.resize(n);
  // Fill the lower half and mirror, so alpha[w] == alpha[n - w] exactly and
  // rescaled real fields stay real.
  for (int w = 0; w <= n / 2; ++w) {
    const double denominator = perturbation.power[w];
    double alpha = 1.0;
    if (denominator > denominator_floor) {
      const double radicand =
          std::max(0.0, clamped.power[w] - mean_field.power[w]) / denominator;
      alpha = std::sqrt(radicand);
    }
    factors.alpha[w] = alpha;
    if (w != 0 && w != n - w) factors.alpha[n - w] = alpha;
  }
  return factors;
}

RescalingFactors rescaling_factors(const Ensemble& ensemble,
                                   const SmoothingKernel& kernel) {
  const EnsembleStats stats = decompose(ensemble);
  const SpectrumProfile mean_field = power_spectrum(stats.mean);
  const SpectrumProfile ensemble_spectrum = mean_power_spectrum(ensemble);

  const int n = ensemble.dimension();
  const int k = ensemble.size();
  Eigen::VectorXd pert_power = Eigen::VectorXd::Zero(n);
  for (int member = 0; member < k; ++member) {
    const StateVector anomaly = ensemble.member(member) - stats.mean;
    pert_power += forward_transform(anomaly).cwiseAbs2();
  }
  SpectrumProfile perturbation;
  perturbation.power = pert_power / static_cast<double>(k);

  const SpectrumProfile clamped =
      clamped_smooth(ensemble_spectrum, mean_field, kernel);
  return rescaling_factors_from_spectra(clamped, mean_field, perturbation);
}

Ensemble apply_spectrum_smoothing(const Ensemble& ensemble,
                                  const SmoothingKernel& kernel) {
  const EnsembleStats stats = decompose(ensemble);
  const int n = ensemble.dimension();
  const int k = ensemble.size();

  std::vector<Eigen::VectorXcd> anomaly_coefficients;
  anomaly_coefficients.reserve(static_cast<std::size_t>(k));
  Eigen::VectorXd pert_power = Eigen::VectorXd::Zero(n);
  for (int member = 0; member < k; ++member) {
    const StateVector anomaly = ensemble.member(member) - stats.mean;
    anomaly_coefficients.push_back(forward_transform(anomaly));
    pert_power += anomaly_coefficients.back().cwiseAbs2();
  }
  SpectrumProfile perturbation;
  perturbation.power = pert_power / static_cast<double>(k);

  const SpectrumProfile mean_field = power_spectrum(stats.mean);
  const SpectrumProfile ensemble_spectrum = mean_power_spectrum(ensemble);
  const SpectrumProfile clamped =
      clamped_smooth(ensemble_spectrum, mean_field, kernel);
  const RescalingFactors factors = rescaling_factors_from_spectra(
      clamped, mean_field, perturbation);

  return rescale_members(ensemble, factors.alpha, &stats.mean,
                         anomaly_coefficients);
}

Ensemble apply_whole_ensemble_rescaling(const Ensemble& ensemble,
                                        const SmoothingKernel& kernel) {
  const EnsembleStats stats = decompose(ensemble);
  const int n = ensemble.dimension();
  const int k = ensemble.size();

  std::vector<Eigen::VectorXcd> member_coefficients;
  member_coefficients.reserve(static_cast<std::size_t>(k));
  Eigen::VectorXd total_power = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd pert_power = Eigen::VectorXd::Zero(n);
  for (int member = 0; member < k; ++member) {
    member_coefficients.push_back(forward_transform(ensemble.member(member)));
    total_power += member_coefficients.back().cwiseAbs2();
    const StateVector anomaly = ensemble.member(member) - stats.mean;
    pert_power += forward_transform(anomaly).cwiseAbs2();
  }
  SpectrumProfile ensemble_spectrum;
  ensemble_spectrum.power = total_power / static_cast<double>(k);
  const SpectrumProfile mean_field = power_spectrum(stats.mean);

  const SpectrumProfile clamped =
      clamped_smooth(ensemble_spectrum, mean_field, kernel);

  // Denominator of the whole-ensemble factor: |F(mean)|^2 plus the mean
  // perturbation power.
  Eigen::VectorXd denominator =
      mean_field.power + pert_power / static_cast<double>(k);
  const double denominator_floor = 1e-14 * denominator.maxCoeff();

  Eigen::VectorXd alpha(n);
  for (int w = 0; w <= n / 2; ++w) {
    double value = 1.0;
    if (denominator[w] > denominator_floor) {
      value = std::sqrt(clamped.power[w] / denominator[w]);
    }
    alpha[w] = value;
    if (w != 0 && w != n - w) alpha[n - w] = value;
  }

  return rescale_members(ensemble, alpha, nullptr, member_coefficients);
}

}  // namespace specda
