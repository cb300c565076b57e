/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "specda/ensemble.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "parallel.hpp"
#include "specda/errors.hpp"

namespace specda {

Ensemble::Ensemble(Eigen::MatrixXd members) : members_(std::move(members)) {
  if (members_.cols() < 2) {
    throw DegenerateEnsembleError("an ensemble needs at least 2 members, got " +
                                  std::to_string(members_.cols()));
  }
  if (members_.rows() < 1) {
    throw ShapeError("ensemble members must have a positive dimension");
  }
}

Eigen::MatrixXd EnsembleStats::covariance() const {
  return perturbations * perturbations.transpose();
}

EnsembleStats decompose(const Ensemble& ensemble) {
  const int k = ensemble.size();
  EnsembleStats stats;
  stats.mean = ensemble.members().rowwise().mean();
  stats.perturbations =
      (ensemble.members().colwise() - stats.mean) / std::sqrt(double(k - 1));
  return stats;
}

Ensemble recompose(const StateVector& mean,
                   const Eigen::MatrixXd& perturbations) {
  if (perturbations.rows() != mean.size()) {
    throw ShapeError("perturbation dimension does not match the mean");
  }
  const double scale = std::sqrt(double(perturbations.cols() - 1));
  Eigen::MatrixXd members = (scale * perturbations).colwise() + mean;
  return Ensemble(std::move(members));
}

Ensemble propagate(const Ensemble& ensemble, const ModelParams& params,
                   int steps, int jobs) {
  if (steps < 1) {
    throw InvalidParameterError("propagate needs steps >= 1");
  }
  if (ensemble.dimension() != params.dimension) {
    throw ShapeError("ensemble dimension does not match model dimension");
  }
  Eigen::MatrixXd out(ensemble.dimension(), ensemble.size());
  detail::parallel_for(jobs, ensemble.size(), [&](int k) {
    Lorenz96Integrator integrator(params);
    StateVector state = ensemble.member(k);
    try {
      integrator.advance(state, steps);
    } catch (const NumericalOverflowError& e) {
      throw NumericalOverflowError(
          "member " + std::to_string(k) + ": " + e.what(), e.step(), k);
    }
    out.col(k) = state;
  });
  return Ensemble(std::move(out));
}

}  // namespace specda
