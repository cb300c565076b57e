/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "specda/model.hpp"

#include <cmath>
#include <string>

#include "specda/errors.hpp"

namespace specda {

namespace {

// du_n = (u_{n+1} - u_{n-2}) u_{n-1} - u_n + F, cyclic. The three wrap-around
// components are peeled off so the interior loop is branch free.
void tendency_into(const double* u, int n, double forcing, double* du) {
  du[0] = (u[1] - u[n - 2]) * u[n - 1] - u[0] + forcing;
  du[1] = (u[2] - u[n - 1]) * u[0] - u[1] + forcing;
  for (int i = 2; i + 1 < n; ++i) {
    du[i] = (u[i + 1] - u[i - 2]) * u[i - 1] - u[i] + forcing;
  }
  du[n - 1] = (u[0] - u[n - 3]) * u[n - 2] - u[n - 1] + forcing;
}

void check_state(const StateVector& state) {
  if (state.size() < 4) {
    throw InvalidModelError("Lorenz 96 needs dimension >= 4, got " +
                            std::to_string(state.size()));
  }
}

// A single nonfinite entry makes the sum nonfinite, so one reduction detects
// overflow without scanning entry by entry.
bool all_finite(const StateVector& state) {
  return std::isfinite(state.sum());
}

}  // namespace

void ModelParams::validate() const {
  if (dimension < 4) {
    throw InvalidModelError("model dimension must be >= 4, got " +
                            std::to_string(dimension));
  }
  if (!(dt > 0.0)) {
    throw InvalidParameterError("time step dt must be positive");
  }
  if (!std::isfinite(forcing)) {
    throw InvalidParameterError("forcing must be finite");
  }
}

StateVector lorenz96_tendency(const StateVector& state, double forcing) {
  check_state(state);
  StateVector du(state.size());
  tendency_into(state.data(), static_cast<int>(state.size()), forcing,
                du.data());
  return du;
}

Lorenz96Integrator::Lorenz96Integrator(const ModelParams& params)
    : params_(params),
      k1_(params.dimension),
      k2_(params.dimension),
      k3_(params.dimension),
      k4_(params.dimension),
      stage_(params.dimension) {
  params_.validate();
}

void Lorenz96Integrator::step_once(StateVector& state) {
  const int n = params_.dimension;
  const double dt = params_.dt;
  const double f = params_.forcing;

  tendency_into(state.data(), n, f, k1_.data());
  stage_ = state + (0.5 * dt) * k1_;
  tendency_into(stage_.data(), n, f, k2_.data());
  stage_ = state + (0.5 * dt) * k2_;
  tendency_into(stage_.data(), n, f, k3_.data());
  stage_ = state + dt * k3_;
  tendency_into(stage_.data(), n, f, k4_.data());
  state += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

void Lorenz96Integrator::advance(StateVector& state, long steps) {
  if (state.size() != params_.dimension) {
    throw ShapeError("state dimension does not match model dimension");
  }
  for (long s = 1; s <= steps; ++s) {
    step_once(state);
    if (!all_finite(state)) {
      throw NumericalOverflowError(
          "state became nonfinite at integration step " + std::to_string(s),
          s);
    }
  }
}

StateVector rk4_step(const StateVector& state, const ModelParams& params) {
  check_state(state);
  Lorenz96Integrator integrator(params);
  StateVector out = state;
  integrator.advance(out, 1);
  return out;
}

StateVector spin_up(const ModelParams& params, double perturbation,
                    double duration) {
  params.validate();
  if (!(duration > 0.0)) {
    throw InvalidParameterError("spin-up duration must be positive");
  }
  StateVector state = StateVector::Constant(params.dimension, params.forcing);
  state[0] += perturbation;
  const long steps = std::lround(duration / params.dt);
  Lorenz96Integrator integrator(params);
  integrator.advance(state, steps);
  return state;
}

std::vector<StateVector> generate_truth(const StateVector& initial,
                                        const ModelParams& params,
                                        int n_cycles, int steps_per_cycle) {
  params.validate();
  if (n_cycles < 1 || steps_per_cycle < 1) {
    throw InvalidParameterError(
        "generate_truth needs n_cycles >= 1 and steps_per_cycle >= 1");
  }
  std::vector<StateVector> trajectory;
  trajectory.reserve(static_cast<std::size_t>(n_cycles));
  StateVector state = initial;
  Lorenz96Integrator integrator(params);
  for (int j = 1; j <= n_cycles; ++j) {
    integrator.advance(state, steps_per_cycle);
    trajectory.push_back(state);
  }
  return trajectory;
}

}  // namespace specda
