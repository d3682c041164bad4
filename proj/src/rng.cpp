#include "heatchain/rng.hpp"

#include <cmath>

namespace heatchain {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::array<std::uint64_t, 4> expand(std::uint64_t counter) {
  std::array<std::uint64_t, 4> words{};
  for (auto& w : words) {
    counter += kGolden;
    w = splitmix64_mix(counter);
  }
  return words;
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) : s_(expand(seed)) {}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  constexpr double kScale = 0x1.0p-52;
  // k + 0.5 with k < 2^52 is exact in a double.
  return (static_cast<double>(next_u64() >> 12) + 0.5) * kScale;
}

double RngStream::exponential(double mean) {
  return -mean * std::log(uniform());
}

RngStream derive_stream(std::uint64_t seed, std::uint64_t index) {
  return RngStream(splitmix64_mix(seed) ^
                   splitmix64_mix(index ^ 0xD1B54A32D192ED03ULL));
}

}  // namespace heatchain
