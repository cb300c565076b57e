/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "specda/random.hpp"

#include <cmath>
#include <numbers>

namespace specda {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t product =
      static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b);
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline std::array<std::uint32_t, 4> philox_round(
    const std::array<std::uint32_t, 4>& ctr,
    const std::array<std::uint32_t, 2>& key) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
  mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

struct Block {
  std::uint64_t z0;
  std::uint64_t z1;
};

Block philox_block(std::uint64_t seed, RandomStream stream, std::uint64_t a,
                   std::uint32_t b) {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b,
      static_cast<std::uint32_t>(stream)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto out = philox4x32_10(counter, key);
  return {static_cast<std::uint64_t>(out[0]) |
              (static_cast<std::uint64_t>(out[1]) << 32),
          static_cast<std::uint64_t>(out[2]) |
              (static_cast<std::uint64_t>(out[3]) << 32)};
}

// 53-bit mantissa mapping; +1 keeps the value strictly positive so it is safe
// under a logarithm.
inline double to_unit_open(std::uint64_t z) {
  return static_cast<double>((z >> 11) + 1) * 0x1.0p-53;
}

inline double to_unit_half_open(std::uint64_t z) {
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(
    std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    counter = philox_round(counter, key);
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return counter;
}

double counter_uniform(std::uint64_t seed, RandomStream stream,
                       std::uint64_t a, std::uint32_t b) {
  return to_unit_open(philox_block(seed, stream, a, b).z0);
}

double counter_gaussian(std::uint64_t seed, RandomStream stream,
                        std::uint64_t a, std::uint32_t b) {
  const Block block = philox_block(seed, stream, a, b);
  const double u1 = to_unit_open(block.z0);
  const double u2 = to_unit_half_open(block.z1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace specda
