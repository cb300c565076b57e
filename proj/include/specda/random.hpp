/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <cstdint>

namespace specda {

/// Philox4x32-10 counter-based random block function. Every draw is a pure
/// function of (counter, key), so random fields are reproducible regardless
/// of evaluation order or thread schedule.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Independent substreams of the seeded generator.
enum class RandomStream : std::uint32_t {
  kObservationNoise = 1,
  kInitialEnsemble = 2,
};

/// Uniform deviate in (0, 1], indexed by (seed, stream, a, b).
double counter_uniform(std::uint64_t seed, RandomStream stream,
                       std::uint64_t a, std::uint32_t b);

/// Standard normal deviate indexed by (seed, stream, a, b), via Box-Muller on
/// one Philox block.
double counter_gaussian(std::uint64_t seed, RandomStream stream,
                        std::uint64_t a, std::uint32_t b);

}  // namespace specda
