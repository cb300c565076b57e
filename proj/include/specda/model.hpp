/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <vector>

#include <Eigen/Core>

namespace specda {

/// One realization of the N-dimensional model state.
using StateVector = Eigen::VectorXd;

/// Lorenz 96 model parameters.
struct ModelParams {
  int dimension = 128;   ///< state dimension N (>= 4, cyclic neighbors)
  double forcing = 8.0;  ///< forcing term F
  double dt = 0.01;      ///< integrator step size (> 0)

  /// Throws InvalidModelError / InvalidParameterError on bad values.
  void validate() const;
};

/// Lorenz 96 tendency du_n/dt = (u_{n+1} - u_{n-2}) u_{n-1} - u_n + F with
/// cyclic indexing. Throws InvalidModelError when the dimension is below 4.
StateVector lorenz96_tendency(const StateVector& state, double forcing);

/// One classical fourth-order Runge-Kutta step of size params.dt.
/// Throws NumericalOverflowError if the result stops being finite.
StateVector rk4_step(const StateVector& state, const ModelParams& params);

/// Reusable RK4 integrator holding its stage buffers. Stepping is bitwise
/// identical to repeated rk4_step calls.
class Lorenz96Integrator {
 public:
  explicit Lorenz96Integrator(const ModelParams& params);

  /// Advances `state` in place by `steps` RK4 steps. On overflow throws
  /// NumericalOverflowError carrying the 1-based offending step index.
  void advance(StateVector& state, long steps);

  const ModelParams& params() const { return params_; }

 private:
  void step_once(StateVector& state);

  ModelParams params_;
  Eigen::VectorXd k1_, k2_, k3_, k4_, stage_;
};

/// Integrates the constant state u = F, perturbed in its first component by
/// `perturbation`, for `duration` model-time units, and returns the final
/// state. With a zero perturbation the fixed point is returned exactly.
StateVector spin_up(const ModelParams& params, double perturbation,
                    double duration);

/// Integrates from `initial` and records the state at every observation time
/// t_j = j * steps_per_cycle * dt, j = 1..n_cycles.
std::vector<StateVector> generate_truth(const StateVector& initial,
                                        const ModelParams& params,
                                        int n_cycles, int steps_per_cycle);

}  // namespace specda
