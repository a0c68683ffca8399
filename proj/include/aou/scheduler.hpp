// SPDX-License-Identifier: Apache-2.0
//
// Age-of-update bookkeeping and the scheduling policies. Every policy runs the
// same greedy recursion: build the candidate list over the unassigned
// subchannels, pick one candidate, commit its allocation, drop its
// subchannels, repeat until no candidate remains. The policies differ only in
// which candidate is picked.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aou/allocation.hpp"
#include "aou/channel.hpp"

namespace aou {

struct FairnessConfig {
  double alpha = 1.0;

  void validate() const;
};

// Staleness sensitivity: x^(1-a)/(1-a) for a != 1, log(1+x) for a == 1.
// For a > 1 and x == 0 the value diverges; -infinity is returned, which orders
// below every finite score. Throws std::domain_error for x < 0.
double f_alpha(double x, double alpha);

struct AgeVector {
  std::vector<std::uint64_t> ages;

  AgeVector() = default;
  explicit AgeVector(std::size_t num_ues) : ages(num_ues, 0) {}

  std::size_t size() const { return ages.size(); }
  double mean() const;
  std::uint64_t max() const;
};

// T <- (T + 1) * (1 - S), elementwise.
AgeVector aou_step(const AgeVector& ages, std::span<const std::uint8_t> selected);

// sum_k f_alpha(T_k) * (1 - S_k).
double aou_objective(const AgeVector& ages, std::span<const std::uint8_t> selected,
                     double alpha);

struct ScheduleDecision {
  std::vector<std::uint8_t> selected;
  std::vector<Allocation> allocations;  // in commit order
  std::vector<double> scores;           // policy score of each commit
  std::optional<double> objective_value;

  std::size_t scheduled_count() const { return allocations.size(); }
};

ScheduleDecision abs_schedule(const AgeVector& ages, const ChannelRealization& realization,
                              const RadioConfig& radio, const FairnessConfig& fairness);

// Fewest-subchannels-first packing. Ignores ages; objective_value stays unset.
ScheduleDecision maxpack_schedule(const ChannelRealization& realization,
                                  const RadioConfig& radio);

struct RoundRobinResult {
  ScheduleDecision decision;
  std::size_t next_cursor = 0;
};

RoundRobinResult round_robin_schedule(const ChannelRealization& realization,
                                      const RadioConfig& radio, std::size_t cursor);

ScheduleDecision random_schedule(const ChannelRealization& realization,
                                 const RadioConfig& radio, RandomStream& rng);

enum class PolicyKind { kAbs, kMaxPack, kRoundRobin, kRandom };

// "abs" | "maxpack" | "round_robin" | "random"; throws ConfigError otherwise.
PolicyKind parse_policy(std::string_view name);
std::string_view policy_name(PolicyKind kind);

// Owns the per-policy state (round-robin cursor, random stream seed) and
// fills in the objective for every decision.
class SchedulingPolicy {
 public:
  SchedulingPolicy(PolicyKind kind, RadioConfig radio, FairnessConfig fairness,
                   std::uint64_t master_seed);

  ScheduleDecision decide(const AgeVector& ages, const ChannelRealization& realization,
                          std::size_t round);

  PolicyKind kind() const { return kind_; }
  std::size_t cursor() const { return cursor_; }

 private:
  PolicyKind kind_;
  RadioConfig radio_;
  FairnessConfig fairness_;
  std::uint64_t master_seed_;
  std::size_t cursor_ = 0;
};

// Throws InvariantViolation if committed channel sets overlap, leave [0, N),
// miss the rate target, exceed the power budget, or disagree with `selected`.
void check_decision(const ScheduleDecision& decision, const ChannelRealization& realization,
                    const RadioConfig& radio);

}  // namespace aou
