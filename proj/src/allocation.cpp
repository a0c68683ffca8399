// SPDX-License-Identifier: Apache-2.0
#include "aou/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aou/error.hpp"

namespace aou {

void RadioConfig::validate() const {
  if (!(max_power > 0.0) || !std::isfinite(max_power)) {
    throw ConfigError("radio.max_power: must be positive and finite");
  }
  if (!(rate_target >= 0.0)) throw ConfigError("radio.rate_target: must be >= 0");
  if (!(rate_prefactor > 0.0) || !std::isfinite(rate_prefactor)) {
    throw ConfigError("radio.rate_prefactor: must be positive and finite");
  }
}

double Allocation::total_power() const {
  return std::accumulate(powers.begin(), powers.end(), 0.0);
}

const Allocation* CandidateList::find(std::size_t ue_id) const {
  auto it = std::lower_bound(allocations.begin(), allocations.end(), ue_id,
                             [](const Allocation& a, std::size_t id) { return a.ue_id < id; });
  return (it != allocations.end() && it->ue_id == ue_id) ? &*it : nullptr;
}

namespace {

// Bracket term P(m) for the first m channels.
double level_budget(std::span<const double> gains, std::size_t m, double max_power) {
  const double inv_last = 1.0 / gains[m - 1];
  double spent = 0.0;
  for (std::size_t n = 0; n + 1 < m; ++n) spent += inv_last - 1.0 / gains[n];
  return max_power - spent;
}

}  // namespace

std::vector<double> waterfill(std::span<const double> sorted_gains, double max_power) {
  if (sorted_gains.empty()) throw ContractViolation("waterfill: no gains");
  if (!(max_power > 0.0)) throw ContractViolation("waterfill: max_power must be > 0");
  for (std::size_t n = 0; n < sorted_gains.size(); ++n) {
    if (!(sorted_gains[n] > 0.0)) throw ContractViolation("waterfill: gains must be > 0");
    if (n > 0 && sorted_gains[n] > sorted_gains[n - 1]) {
      throw ContractViolation("waterfill: gains must be sorted in descending order");
    }
  }

  // Shrink to the largest prefix whose bracket is positive. m = 1 always
  // qualifies (P(1) = P_TX).
  std::size_t active = sorted_gains.size();
  double budget = level_budget(sorted_gains, active, max_power);
  while (active > 1 && budget <= 0.0) {
    --active;
    budget = level_budget(sorted_gains, active, max_power);
  }

  std::vector<double> powers(sorted_gains.size(), 0.0);
  const double inv_last = 1.0 / sorted_gains[active - 1];
  const double share = budget / static_cast<double>(active);
  for (std::size_t n = 0; n < active; ++n) {
    powers[n] = std::max(0.0, share + inv_last - 1.0 / sorted_gains[n]);
  }
  // Rounding can leave the sum a few ulps above the budget; take the excess
  // off the strongest channel so the budget holds exactly in floating point.
  for (int pass = 0; pass < 8; ++pass) {
    const double excess = std::accumulate(powers.begin(), powers.end(), 0.0) - max_power;
    if (excess <= 0.0) break;
    powers[0] = std::max(0.0, std::nextafter(powers[0] - excess, 0.0));
  }
  return powers;
}

double achieved_rate(std::span<const double> gains, std::span<const double> powers,
                     double prefactor) {
  if (gains.size() != powers.size()) {
    throw ContractViolation("achieved_rate: gains and powers differ in length");
  }
  double sum = 0.0;
  for (std::size_t n = 0; n < gains.size(); ++n) {
    if (powers[n] < 0.0) throw ContractViolation("achieved_rate: negative power");
    sum += std::log1p(gains[n] * powers[n]);
  }
  return prefactor * sum;
}

std::optional<Allocation> min_subchannel_allocation(std::size_t ue_id,
                                                    std::span<const double> ue_gains,
                                                    std::span<const std::size_t> available,
                                                    const RadioConfig& radio) {
  if (available.empty()) return std::nullopt;

  std::vector<std::size_t> order(available.begin(), available.end());
  for (std::size_t c : order) {
    if (c >= ue_gains.size()) throw ContractViolation("min_subchannel_allocation: bad channel");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ue_gains[a] != ue_gains[b]) return ue_gains[a] > ue_gains[b];
    return a < b;
  });
  std::vector<double> sorted(order.size());
  std::transform(order.begin(), order.end(), sorted.begin(),
                 [&](std::size_t c) { return ue_gains[c]; });

  for (std::size_t m = 1; m <= sorted.size(); ++m) {
    const auto prefix = std::span<const double>(sorted).first(m);
    std::vector<double> powers = waterfill(prefix, radio.max_power);
    const double rate = achieved_rate(prefix, powers, radio.rate_prefactor);
    if (rate >= radio.rate_target) {
      Allocation out;
      out.ue_id = ue_id;
      out.channels.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
      out.powers = std::move(powers);
      out.rate = rate;
      return out;
    }
  }
  return std::nullopt;
}

CandidateList build_candidate_list(const ChannelRealization& realization,
                                   std::span<const std::size_t> available,
                                   const RadioConfig& radio,
                                   std::span<const std::uint8_t> eligible) {
  if (eligible.size() != realization.num_ues()) {
    throw ContractViolation("build_candidate_list: eligibility mask has wrong length");
  }
  CandidateList list;
  if (available.empty()) return list;
  for (std::size_t k = 0; k < realization.num_ues(); ++k) {
    if (!eligible[k]) continue;
    if (auto alloc = min_subchannel_allocation(k, realization.row(k), available, radio)) {
      list.allocations.push_back(std::move(*alloc));
    }
  }
  return list;
}

CandidateList build_candidate_list(const ChannelRealization& realization,
                                   std::span<const std::size_t> available,
                                   const RadioConfig& radio) {
  const std::vector<std::uint8_t> everyone(realization.num_ues(), 1);
  return build_candidate_list(realization, available, radio, everyone);
}

}  // namespace aou
