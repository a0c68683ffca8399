// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace aou {

// Deterministic random stream. All variate transforms are implemented here
// rather than through <random> distributions, whose output is
// implementation-defined, so results are identical across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open();
  double exponential(double mean);
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  // Uniform integer in [0, n), rejection-sampled. n must be > 0.
  std::size_t index(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

enum class StreamPurpose : std::uint64_t {
  kTopology = 1,
  kFading = 2,
  kSgd = 3,
  kModelInit = 4,
  kDataGeneration = 5,
  kPartition = 6,
  kTestSplit = 7,
  kRandomPolicy = 8,
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based substream derivation:
//   seed = mix(mix(mix(mix(master) ^ purpose) ^ a) ^ b)
// where mix is the splitmix64 finalizer. Streams for distinct
// (purpose, a, b) tuples are independent of evaluation order.
RandomStream derive_stream(std::uint64_t master_seed, StreamPurpose purpose,
                           std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace aou
