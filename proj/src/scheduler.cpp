// SPDX-License-Identifier: Apache-2.0
#include "aou/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "aou/error.hpp"

namespace aou {

void FairnessConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("fairness.alpha: must be finite and >= 0");
  }
}

double f_alpha(double x, double alpha) {
  if (!(x >= 0.0)) throw std::domain_error("f_alpha: argument must be >= 0");
  if (alpha == 1.0) return std::log1p(x);
  if (alpha > 1.0 && x == 0.0) return -std::numeric_limits<double>::infinity();
  return std::pow(x, 1.0 - alpha) / (1.0 - alpha);
}

double AgeVector::mean() const {
  if (ages.empty()) return 0.0;
  double sum = 0.0;
  for (auto a : ages) sum += static_cast<double>(a);
  return sum / static_cast<double>(ages.size());
}

std::uint64_t AgeVector::max() const {
  return ages.empty() ? 0 : *std::max_element(ages.begin(), ages.end());
}

AgeVector aou_step(const AgeVector& ages, std::span<const std::uint8_t> selected) {
  if (ages.size() != selected.size()) {
    throw ContractViolation("aou_step: ages and selection differ in length");
  }
  AgeVector next(ages.size());
  for (std::size_t k = 0; k < ages.size(); ++k) {
    next.ages[k] = selected[k] ? 0 : ages.ages[k] + 1;
  }
  return next;
}

double aou_objective(const AgeVector& ages, std::span<const std::uint8_t> selected,
                     double alpha) {
  if (ages.size() != selected.size()) {
    throw ContractViolation("aou_objective: ages and selection differ in length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < ages.size(); ++k) {
    if (!selected[k]) sum += f_alpha(static_cast<double>(ages.ages[k]), alpha);
  }
  return sum;
}

namespace {

struct Pick {
  std::size_t index;  // into CandidateList::allocations
  double score;
};

// Shared greedy recursion. `choose` sees a non-empty candidate list.
template <typename Choose>
ScheduleDecision greedy_schedule(const ChannelRealization& realization,
                                 const RadioConfig& radio, Choose&& choose) {
  radio.validate();
  const std::size_t num_ues = realization.num_ues();
  std::vector<std::size_t> available(realization.num_subchannels());
  std::iota(available.begin(), available.end(), std::size_t{0});
  std::vector<std::uint8_t> eligible(num_ues, 1);

  ScheduleDecision decision;
  decision.selected.assign(num_ues, 0);
  while (!available.empty()) {
    CandidateList candidates = build_candidate_list(realization, available, radio, eligible);
    if (candidates.empty()) break;
    const Pick pick = choose(candidates);
    Allocation& chosen = candidates.allocations[pick.index];
    decision.selected[chosen.ue_id] = 1;
    eligible[chosen.ue_id] = 0;
    std::erase_if(available, [&](std::size_t c) {
      return std::find(chosen.channels.begin(), chosen.channels.end(), c) !=
             chosen.channels.end();
    });
    decision.scores.push_back(pick.score);
    decision.allocations.push_back(std::move(chosen));
  }
  return decision;
}

}  // namespace

ScheduleDecision abs_schedule(const AgeVector& ages, const ChannelRealization& realization,
                              const RadioConfig& radio, const FairnessConfig& fairness) {
  if (ages.size() != realization.num_ues()) {
    throw ContractViolation("abs_schedule: age vector does not match realization");
  }
  fairness.validate();
  auto decision = greedy_schedule(realization, radio, [&](const CandidateList& list) {
    Pick best{0, 0.0};
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Allocation& a = list.allocations[i];
      const double score = f_alpha(static_cast<double>(ages.ages[a.ue_id]), fairness.alpha) /
                           static_cast<double>(a.count());
      if (i == 0) {
        best = {i, score};
        continue;
      }
      // Ties: fewer subchannels, then lower UE index (list is ordered by UE).
      const Allocation& b = list.allocations[best.index];
      if (score > best.score || (score == best.score && a.count() < b.count())) {
        best = {i, score};
      }
    }
    return best;
  });
  decision.objective_value = aou_objective(ages, decision.selected, fairness.alpha);
  return decision;
}

ScheduleDecision maxpack_schedule(const ChannelRealization& realization,
                                  const RadioConfig& radio) {
  return greedy_schedule(realization, radio, [](const CandidateList& list) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list.allocations[i].count() < list.allocations[best].count()) best = i;
    }
    return Pick{best, static_cast<double>(list.allocations[best].count())};
  });
}

RoundRobinResult round_robin_schedule(const ChannelRealization& realization,
                                      const RadioConfig& radio, std::size_t cursor) {
  radio.validate();
  const std::size_t num_ues = realization.num_ues();
  if (cursor >= num_ues) throw ContractViolation("round_robin_schedule: cursor out of range");

  std::vector<std::size_t> available(realization.num_subchannels());
  std::iota(available.begin(), available.end(), std::size_t{0});

  RoundRobinResult result;
  result.decision.selected.assign(num_ues, 0);
  std::size_t last_examined = (cursor + num_ues - 1) % num_ues;
  for (std::size_t step = 0; step < num_ues && !available.empty(); ++step) {
    const std::size_t k = (cursor + step) % num_ues;
    last_examined = k;
    auto alloc = min_subchannel_allocation(k, realization.row(k), available, radio);
    if (!alloc) continue;
    std::erase_if(available, [&](std::size_t c) {
      return std::find(alloc->channels.begin(), alloc->channels.end(), c) !=
             alloc->channels.end();
    });
    result.decision.selected[k] = 1;
    result.decision.scores.push_back(static_cast<double>(step));
    result.decision.allocations.push_back(std::move(*alloc));
  }
  result.next_cursor = (last_examined + 1) % num_ues;
  return result;
}

ScheduleDecision random_schedule(const ChannelRealization& realization,
                                 const RadioConfig& radio, RandomStream& rng) {
  return greedy_schedule(realization, radio, [&](const CandidateList& list) {
    return Pick{rng.index(list.size()), 0.0};
  });
}

PolicyKind parse_policy(std::string_view name) {
  if (name == "abs") return PolicyKind::kAbs;
  if (name == "maxpack") return PolicyKind::kMaxPack;
  if (name == "round_robin") return PolicyKind::kRoundRobin;
  if (name == "random") return PolicyKind::kRandom;
  throw ConfigError("policy: unknown policy '" + std::string(name) +
                    "' (expected abs, maxpack, round_robin or random)");
}

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kAbs: return "abs";
    case PolicyKind::kMaxPack: return "maxpack";
    case PolicyKind::kRoundRobin: return "round_robin";
    case PolicyKind::kRandom: return "random";
  }
  return "unknown";
}

SchedulingPolicy::SchedulingPolicy(PolicyKind kind, RadioConfig radio, FairnessConfig fairness,
                                   std::uint64_t master_seed)
    : kind_(kind), radio_(radio), fairness_(fairness), master_seed_(master_seed) {
  radio_.validate();
  fairness_.validate();
}

ScheduleDecision SchedulingPolicy::decide(const AgeVector& ages,
                                          const ChannelRealization& realization,
                                          std::size_t round) {
  ScheduleDecision decision;
  switch (kind_) {
    case PolicyKind::kAbs:
      decision = abs_schedule(ages, realization, radio_, fairness_);
      break;
    case PolicyKind::kMaxPack:
      decision = maxpack_schedule(realization, radio_);
      break;
    case PolicyKind::kRoundRobin: {
      if (cursor_ >= realization.num_ues()) cursor_ = 0;
      auto result = round_robin_schedule(realization, radio_, cursor_);
      cursor_ = result.next_cursor;
      decision = std::move(result.decision);
      break;
    }
    case PolicyKind::kRandom: {
      RandomStream rng = derive_stream(master_seed_, StreamPurpose::kRandomPolicy, round);
      decision = random_schedule(realization, radio_, rng);
      break;
    }
  }
  decision.objective_value = aou_objective(ages, decision.selected, fairness_.alpha);
  return decision;
}

void check_decision(const ScheduleDecision& decision, const ChannelRealization& realization,
                    const RadioConfig& radio) {
  const std::size_t n = realization.num_subchannels();
  if (decision.selected.size() != realization.num_ues()) {
    throw InvariantViolation("selection vector length differs from K");
  }
  std::vector<std::uint8_t> used(n, 0);
  std::size_t selected_count = 0;
  for (auto s : decision.selected) selected_count += s ? 1 : 0;
  if (selected_count != decision.allocations.size()) {
    throw InvariantViolation("selection vector disagrees with committed allocations");
  }
  for (const Allocation& a : decision.allocations) {
    const std::string who = "UE " + std::to_string(a.ue_id);
    if (a.ue_id >= realization.num_ues() || !decision.selected[a.ue_id]) {
      throw InvariantViolation(who + ": allocation for an unselected UE");
    }
    if (a.channels.empty() || a.channels.size() != a.powers.size()) {
      throw InvariantViolation(who + ": malformed allocation");
    }
    std::vector<double> gains;
    for (std::size_t c : a.channels) {
      if (c >= n) throw InvariantViolation(who + ": subchannel outside [0, N)");
      if (used[c]) {
        throw InvariantViolation(who + ": subchannel " + std::to_string(c) +
                                 " assigned twice (orthogonality)");
      }
      used[c] = 1;
      gains.push_back(realization.gain(a.ue_id, c));
    }
    for (double p : a.powers) {
      if (p < 0.0) throw InvariantViolation(who + ": negative power");
    }
    if (a.total_power() > radio.max_power + 1e-12) {
      throw InvariantViolation(who + ": power budget exceeded");
    }
    const double rate = achieved_rate(gains, a.powers, radio.rate_prefactor);
    if (rate < radio.rate_target - 1e-12) {
      throw InvariantViolation(who + ": committed rate below target");
    }
  }
}

}  // namespace aou
