#pragma once

#include <array>
#include <cstdint>

namespace heatchain {

/// Deterministic pseudo-random stream: xoshiro256++ with a splitmix64
/// seeding sequence. All conversions to floating point are spelled out
/// here so that a stream reproduces bit-exactly on any IEEE-754 platform
/// (no std::*_distribution, whose algorithms are implementation-defined).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1): ((x >> 12) + 0.5) * 2^-52.
  /// The smallest value is 2^-53 and the largest 1 - 2^-53, so 0 and 1
  /// are never produced and no rejection loop is needed.
  double uniform();

  /// Exponential with the given mean by inversion: -mean * log(uniform()).
  double exponential(double mean);

  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  std::array<std::uint64_t, 4> s_;
};

/// splitmix64 output function (Steele, Lea & Flood; Vigna's constants).
std::uint64_t splitmix64_mix(std::uint64_t z);

/// Stream for trajectory `index` of an ensemble with master seed `seed`.
///
/// The xoshiro state words are four consecutive splitmix64 outputs from
/// the counter start x0 = mix(seed) ^ mix(index ^ 0xD1B54A32D192ED03).
/// mix is a bijection of 64-bit words, so for a fixed seed distinct
/// indices give distinct counter starts.
RngStream derive_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace heatchain
