// SPDX-License-Identifier: Apache-2.0
#include "aou/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace aou {

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::exponential(double mean) {
  return -mean * std::log(uniform_open());
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::size_t RandomStream::index(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = next_u64();
  while (draw >= limit) draw = next_u64();
  return static_cast<std::size_t>(draw % bound);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream derive_stream(std::uint64_t master_seed, StreamPurpose purpose,
                           std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return RandomStream(h);
}

}  // namespace aou
