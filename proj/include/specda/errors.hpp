/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace specda {

/// Base class of all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The dynamical model cannot be evaluated (e.g. state dimension too small).
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its admissible range.
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Array/matrix dimensions do not match.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An ensemble is too small (or too degenerate) for the requested statistic.
class DegenerateEnsembleError : public Error {
 public:
  using Error::Error;
};

/// A state stopped being finite during time integration. Carries the index of
/// the offending step and, when raised from an ensemble operation, the member.
class NumericalOverflowError : public Error {
 public:
  NumericalOverflowError(const std::string& what, long step, int member = -1)
      : Error(what), step_(step), member_(member) {}

  long step() const noexcept { return step_; }
  /// Ensemble member index, or -1 when not raised from an ensemble operation.
  int member() const noexcept { return member_; }

 private:
  long step_;
  int member_;
};

/// A linear solve or factorization failed; carries a condition estimate.
class NumericalFailureError : public Error {
 public:
  NumericalFailureError(const std::string& what, double condition_estimate)
      : Error(what), condition_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A matrix expected to be symmetric positive semidefinite was not.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

}  // namespace specda
