/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <Eigen/Core>

#include "specda/model.hpp"

namespace specda {

/// A collection of K state vectors of common dimension N, stored as an N x K
/// matrix whose k-th column is member k. Member ordering is preserved by
/// every operation so seeded runs are bitwise reproducible.
class Ensemble {
 public:
  /// Wraps an N x K member matrix. Throws DegenerateEnsembleError for K < 2
  /// and ShapeError for an empty state dimension.
  explicit Ensemble(Eigen::MatrixXd members);

  int dimension() const { return static_cast<int>(members_.rows()); }
  int size() const { return static_cast<int>(members_.cols()); }

  const Eigen::MatrixXd& members() const { return members_; }
  Eigen::MatrixXd& members() { return members_; }

  /// Column view of member k.
  Eigen::MatrixXd::ConstColXpr member(int k) const { return members_.col(k); }

 private:
  Eigen::MatrixXd members_;
};

/// Mean / scaled-perturbation decomposition of an ensemble. The perturbation
/// matrix carries the 1/sqrt(K-1) factor, so covariance() is exactly
/// perturbations * perturbations^T.
struct EnsembleStats {
  StateVector mean;               ///< length N
  Eigen::MatrixXd perturbations;  ///< N x K, column k = (u_k - mean)/sqrt(K-1)

  /// Materializes the N x N sample covariance on demand.
  Eigen::MatrixXd covariance() const;
};

/// Sample mean and scaled perturbations. Throws DegenerateEnsembleError when
/// K < 2.
EnsembleStats decompose(const Ensemble& ensemble);

/// Rebuilds members as mean + sqrt(K-1) * perturbation column. Inverse of
/// decompose up to floating point. Throws ShapeError on dimension mismatch.
Ensemble recompose(const StateVector& mean,
                   const Eigen::MatrixXd& perturbations);

/// Advances every member independently by `steps` RK4 steps. Members may be
/// integrated in parallel (`jobs` worker threads); the result is bitwise
/// identical to sequential execution. Overflow errors are tagged with the
/// member index.
Ensemble propagate(const Ensemble& ensemble, const ModelParams& params,
                   int steps, int jobs = 1);

}  // namespace specda
