// SPDX-License-Identifier: Apache-2.0
#include "aou/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "aou/error.hpp"

namespace aou {

void DataConfig::validate() const {
  switch (source) {
    case DataSource::kSynthetic:
      if (num_samples < 1) throw ConfigError("data.n: must be >= 1");
      if (dim < 1) throw ConfigError("data.d: must be >= 1");
      if (!(margin >= 0.0)) throw ConfigError("data.margin: must be >= 0");
      if (!(center_offset >= 0.0)) throw ConfigError("data.offset: must be >= 0");
      break;
    case DataSource::kIdx:
      if (train_images.empty()) throw ConfigError("data.train_images: required for idx source");
      if (train_labels.empty()) throw ConfigError("data.train_labels: required for idx source");
      if (test_images.empty() != test_labels.empty()) {
        throw ConfigError("data.test_images: test_images and test_labels go together");
      }
      if (digit_a < 0 || digit_a > 9) throw ConfigError("data.digits: digits must be 0..9");
      if (digit_b < 0 || digit_b > 9 || digit_a == digit_b) {
        throw ConfigError("data.digits: need two distinct digits in 0..9");
      }
      break;
    case DataSource::kCsv:
      if (csv_path.empty()) throw ConfigError("data.path: required for csv source");
      break;
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("data.test_fraction: must lie in (0, 1)");
  }
}

void ExperimentConfig::validate() const {
  if (num_ues < 1) throw ConfigError("K: must be >= 1");
  if (rounds < 1) throw ConfigError("rounds: must be >= 1");
  if (!(init_stddev >= 0.0) || !std::isfinite(init_stddev)) {
    throw ConfigError("init_stddev: must be finite and >= 0");
  }
  channel.validate();
  radio.validate();
  fairness.validate();
  learning.validate();
  data.validate();
}

FederatedData prepare_data(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const DataConfig& dc = config.data;
  Dataset pool;
  Dataset test;
  bool have_test = false;
  switch (dc.source) {
    case DataSource::kSynthetic: {
      RandomStream rng = derive_stream(seed, StreamPurpose::kDataGeneration);
      pool = generate_synthetic(dc.num_samples, dc.dim, dc.margin, rng, dc.center_offset).data;
      break;
    }
    case DataSource::kIdx:
      pool = load_idx(dc.train_images, dc.train_labels, dc.digit_a, dc.digit_b);
      if (!dc.test_images.empty()) {
        test = load_idx(dc.test_images, dc.test_labels, dc.digit_a, dc.digit_b);
        have_test = true;
      }
      break;
    case DataSource::kCsv: {
      std::ifstream in(dc.csv_path);
      if (!in) throw ConfigError("data.path: cannot open " + dc.csv_path);
      pool = read_dataset_csv(in);
      break;
    }
  }

  FederatedData out;
  if (have_test) {
    out.test = std::move(test);
  } else {
    RandomStream split_rng = derive_stream(seed, StreamPurpose::kTestSplit);
    auto [train, held_out] = split_dataset(pool, dc.test_fraction, split_rng);
    pool = std::move(train);
    out.test = std::move(held_out);
  }
  if (out.test.empty()) throw ConfigError("data: empty test set");
  RandomStream part_rng = derive_stream(seed, StreamPurpose::kPartition);
  out.local = partition_dataset(pool, config.num_ues, dc.partition, part_rng);
  return out;
}

namespace {

void check_ages(const AgeVector& before, const AgeVector& after,
                std::span<const std::uint8_t> selected, std::size_t round) {
  for (std::size_t k = 0; k < before.size(); ++k) {
    const std::uint64_t expected = selected[k] ? 0 : before.ages[k] + 1;
    if (after.ages[k] != expected) {
      throw InvariantViolation("round " + std::to_string(round) + ": age of UE " +
                               std::to_string(k) + " breaks the age recursion");
    }
  }
}

}  // namespace

RunResult run(const ExperimentConfig& config, const FederatedData& data,
              const RoundObserver& observer) {
  config.validate();
  const std::uint64_t seed = config.seed;
  const std::size_t num_ues = config.num_ues;
  if (data.local.size() != num_ues) {
    throw ConfigError("K: prepared data has " + std::to_string(data.local.size()) + " shards");
  }
  const std::size_t dim = data.test.dim;

  RandomStream topo_rng = derive_stream(seed, StreamPurpose::kTopology);
  const NetworkTopology topology = sample_topology(num_ues, config.channel, topo_rng);

  RunResult result;
  result.config = config;
  result.seed = seed;
  {
    RandomStream init_rng = derive_stream(seed, StreamPurpose::kModelInit);
    result.initial_model = Model(dim);
    for (double& w : result.initial_model.weights) w = config.init_stddev * init_rng.normal();
  }

  SchedulingPolicy policy(config.policy, config.radio, config.fairness, seed);
  Model global = result.initial_model;
  AgeVector ages(num_ues);
  result.rounds.reserve(config.rounds);

  for (std::size_t t = 0; t < config.rounds; ++t) {
    const auto started = std::chrono::steady_clock::now();
    RandomStream fading_rng = derive_stream(seed, StreamPurpose::kFading, t);
    const ChannelRealization realization = sample_gains(topology, config.channel, fading_rng);

    const ScheduleDecision decision = policy.decide(ages, realization, t);
    check_decision(decision, realization, config.radio);
    if (decision.scheduled_count() > std::min(num_ues, config.num_subchannels())) {
      throw InvariantViolation("round " + std::to_string(t) + ": more UEs than subchannels");
    }

    // Commit order does not matter for the result: aggregation runs over UE
    // index order.
    std::vector<Model> trained;
    std::vector<std::size_t> sizes;
    for (std::size_t k = 0; k < num_ues; ++k) {
      if (!decision.selected[k]) continue;
      RandomStream sgd_rng = derive_stream(seed, StreamPurpose::kSgd, t, k);
      trained.push_back(local_update(global, data.local[k], config.learning, sgd_rng));
      sizes.push_back(data.local[k].size());
    }
    if (!trained.empty()) global = aggregate(trained, sizes);

    AgeVector next = aou_step(ages, decision.selected);
    check_ages(ages, next, decision.selected, t);

    RoundMetrics m;
    m.round = t;
    m.accuracy = evaluate(global, data.test);
    m.scheduled = decision.scheduled_count();
    m.mean_aou = next.mean();
    m.max_aou = next.max();
    m.objective = decision.objective_value.value_or(
        aou_objective(ages, decision.selected, config.fairness.alpha));
    if (observer) observer(RoundView{t, ages, realization, decision, next});
    ages = std::move(next);
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.rounds.push_back(m);
  }
  result.final_model = std::move(global);
  return result;
}

RunResult run(const ExperimentConfig& config, const RoundObserver& observer) {
  const FederatedData data = prepare_data(config, config.seed);
  return run(config, data, observer);
}

std::vector<RunResult> sweep(const ExperimentConfig& config,
                             const std::vector<std::uint64_t>& seeds, std::size_t threads) {
  if (seeds.empty()) throw ConfigError("seeds: need at least one seed");
  config.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, seeds.size());

  std::vector<RunResult> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) {
      try {
        ExperimentConfig c = config;
        c.seed = seeds[i];
        results[i] = run(c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::size_t threads_from_env() {
  const char* raw = std::getenv("AOU_FEDSCHED_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') {
    throw ConfigError("AOU_FEDSCHED_THREADS: not a non-negative integer: " + std::string(raw));
  }
  return static_cast<std::size_t>(value);
}

double rate_target_for_infeasible_share(const ExperimentConfig& config,
                                        const std::vector<std::uint64_t>& seeds,
                                        double infeasible_share, std::size_t rounds) {
  if (!(infeasible_share >= 0.0 && infeasible_share < 1.0)) {
    throw ConfigError("infeasible_share: must lie in [0, 1)");
  }
  if (seeds.empty() || rounds == 0) throw ConfigError("seeds: need seeds and rounds");
  std::vector<double> best_rates;
  for (std::uint64_t seed : seeds) {
    RandomStream topo_rng = derive_stream(seed, StreamPurpose::kTopology);
    const NetworkTopology topology = sample_topology(config.num_ues, config.channel, topo_rng);
    for (std::size_t t = 0; t < rounds; ++t) {
      RandomStream fading_rng = derive_stream(seed, StreamPurpose::kFading, t);
      const ChannelRealization realization = sample_gains(topology, config.channel, fading_rng);
      for (std::size_t k = 0; k < config.num_ues; ++k) {
        std::vector<double> gains(realization.row(k).begin(), realization.row(k).end());
        std::sort(gains.begin(), gains.end(), std::greater<>());
        const auto powers = waterfill(gains, config.radio.max_power);
        best_rates.push_back(achieved_rate(gains, powers, config.radio.rate_prefactor));
      }
    }
  }
  std::sort(best_rates.begin(), best_rates.end());
  const auto idx = static_cast<std::size_t>(
      std::floor(infeasible_share * static_cast<double>(best_rates.size())));
  return best_rates[std::min(idx, best_rates.size() - 1)];
}

}  // namespace aou
