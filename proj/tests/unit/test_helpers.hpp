/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "specda/ensemble.hpp"

namespace specda::testing {

// Independent O(N^2) DFT used as an oracle for the transform wrapper.
inline Eigen::VectorXcd naive_dft(const Eigen::VectorXd& input) {
  const auto n = input.size();
  Eigen::VectorXcd out(n);
  for (Eigen::Index w = 0; w < n; ++w) {
    std::complex<double> sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double angle = -2.0 * std::numbers::pi *
                           static_cast<double>(j) * static_cast<double>(w) /
                           static_cast<double>(n);
      sum += input[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[w] = sum;
  }
  return out;
}

// Textbook dense Kalman update oracle.
struct KalmanOracle {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

inline KalmanOracle dense_kalman_update(const Eigen::VectorXd& prior_mean,
                                        const Eigen::MatrixXd& prior_cov,
                                        const Eigen::MatrixXd& h,
                                        const Eigen::MatrixXd& gamma,
                                        const Eigen::VectorXd& y) {
  const Eigen::MatrixXd s = h * prior_cov * h.transpose() + gamma;
  const Eigen::MatrixXd gain = prior_cov * h.transpose() * s.inverse();
  KalmanOracle out;
  out.mean = prior_mean + gain * (y - h * prior_mean);
  out.covariance =
      (Eigen::MatrixXd::Identity(prior_cov.rows(), prior_cov.cols()) -
       gain * h) *
      prior_cov;
  return out;
}

// Dense observation matrix for a subsampling operator.
inline Eigen::MatrixXd dense_observation_matrix(int state_dimension,
                                                const std::vector<int>& indices) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(indices.size()), state_dimension);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    h(static_cast<Eigen::Index>(i), indices[i]) = 1.0;
  }
  return h;
}

inline Ensemble random_ensemble(int dimension, int size, unsigned int seed,
                                double mean_scale = 2.0,
                                double spread = 1.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd mean(dimension);
  for (int i = 0; i < dimension; ++i) mean[i] = mean_scale * normal(rng);
  Eigen::MatrixXd members(dimension, size);
  for (int k = 0; k < size; ++k) {
    for (int i = 0; i < dimension; ++i) {
      members(i, k) = mean[i] + spread * normal(rng);
    }
  }
  return Ensemble(std::move(members));
}

inline double max_relative_error(const Eigen::VectorXd& actual,
                                 const Eigen::VectorXd& expected) {
  const double scale = std::max(expected.cwiseAbs().maxCoeff(), 1e-300);
  return (actual - expected).cwiseAbs().maxCoeff() / scale;
}

inline double max_relative_error(const Eigen::MatrixXd& actual,
                                 const Eigen::MatrixXd& expected) {
  const double scale = std::max(expected.cwiseAbs().maxCoeff(), 1e-300);
  return (actual - expected).cwiseAbs().maxCoeff() / scale;
}

}  // namespace specda::testing
