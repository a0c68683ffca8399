// SPDX-License-Identifier: Apache-2.0
//
// Water-filling power allocation and minimum-subchannel candidate
// construction. A UE is a candidate when it can reach the rate target using
// its n* strongest available subchannels for some n*; the smallest such n*
// is kept.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aou/channel.hpp"

namespace aou {

struct RadioConfig {
  double max_power = 1.0e7;     // P_TX
  double rate_target = 1.0;     // R_s, nats per channel use
  double rate_prefactor = 0.5;  // multiplies sum log(1 + G P)

  void validate() const;
};

struct Allocation {
  std::size_t ue_id = 0;
  // Original subchannel indices, strongest first; powers[i] goes on channels[i].
  std::vector<std::size_t> channels;
  std::vector<double> powers;
  double rate = 0.0;

  std::size_t count() const { return channels.size(); }
  double total_power() const;
};

struct CandidateList {
  std::vector<Allocation> allocations;  // ordered by ue_id; channel sets may overlap

  bool empty() const { return allocations.empty(); }
  std::size_t size() const { return allocations.size(); }
  const Allocation* find(std::size_t ue_id) const;
};

// Water-filling over gains sorted in descending order:
//
//   P(n*) = [P_TX - sum_{n<n*} (1/G_(n*) - 1/G_(n))]^+
//   P_(n) = P(n*)/n* + 1/G_(n*) - 1/G_(n),  n <= n*
//
// When the bracket clamps, the weakest channel sits above the water level and
// the remaining budget is spread over the largest prefix that keeps the
// bracket positive; channels past that prefix get zero power. Powers never
// sum above P_TX. Throws ContractViolation on empty, unsorted or
// non-positive gains.
std::vector<double> waterfill(std::span<const double> sorted_gains, double max_power);

// prefactor * sum log(1 + G P), natural log.
double achieved_rate(std::span<const double> gains, std::span<const double> powers,
                     double prefactor);

// Fewest-subchannel allocation for one UE over `available` (original
// subchannel indices into `ue_gains`). Returns std::nullopt when the UE
// cannot reach the rate target even with every available subchannel.
std::optional<Allocation> min_subchannel_allocation(std::size_t ue_id,
                                                    std::span<const double> ue_gains,
                                                    std::span<const std::size_t> available,
                                                    const RadioConfig& radio);

// Evaluates every UE independently over `available`.
CandidateList build_candidate_list(const ChannelRealization& realization,
                                   std::span<const std::size_t> available,
                                   const RadioConfig& radio);

// Candidates restricted to UEs whose `eligible` flag is set.
CandidateList build_candidate_list(const ChannelRealization& realization,
                                   std::span<const std::size_t> available,
                                   const RadioConfig& radio,
                                   std::span<const std::uint8_t> eligible);

}  // namespace aou
