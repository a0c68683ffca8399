// SPDX-License-Identifier: Apache-2.0
//
// Wireless federated learning loop. Each round draws a block-fading
// realization, asks the configured policy for a schedule, trains the scheduled
// UEs locally from the current global model, aggregates their weights by
// dataset size and advances the age vector.
//
// Randomness is split into substreams keyed by (seed, purpose, round, ue), so
// two policies run with the same seed see the same topology, data, fading and
// per-UE SGD draws.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aou/allocation.hpp"
#include "aou/channel.hpp"
#include "aou/learning.hpp"
#include "aou/scheduler.hpp"

namespace aou {

enum class DataSource { kSynthetic, kIdx, kCsv };

struct DataConfig {
  DataSource source = DataSource::kSynthetic;
  // synthetic
  std::size_t num_samples = 2000;
  std::size_t dim = 10;
  double margin = 1.0;
  double center_offset = 2.0;
  // idx
  std::string train_images;
  std::string train_labels;
  std::string test_images;  // optional; a held-out split is used when empty
  std::string test_labels;
  int digit_a = 3;
  int digit_b = 5;
  // csv
  std::string csv_path;

  PartitionScheme partition = PartitionScheme::kIid;
  double test_fraction = 0.1;

  void validate() const;
};

struct ExperimentConfig {
  std::size_t num_ues = 20;  // K; N lives in channel.num_subchannels
  std::size_t rounds = 100;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;  // sweep seeds; empty means {seed}
  PolicyKind policy = PolicyKind::kAbs;
  double init_stddev = 0.01;
  ChannelConfig channel;
  RadioConfig radio;
  FairnessConfig fairness;
  LearningConfig learning;
  DataConfig data;

  std::size_t num_subchannels() const { return channel.num_subchannels; }
  void validate() const;
};

struct RoundMetrics {
  std::size_t round = 0;
  double accuracy = 0.0;  // of the aggregated model w^{t+1}
  std::size_t scheduled = 0;
  double mean_aou = 0.0;  // over T[t+1]
  std::uint64_t max_aou = 0;
  double objective = 0.0;  // sum_k f_alpha(T_k[t]) (1 - S_k[t])
  double wall_seconds = 0.0;
};

struct RunResult {
  std::vector<RoundMetrics> rounds;
  Model initial_model;
  Model final_model;
  ExperimentConfig config;
  std::uint64_t seed = 0;
};

// Per-UE training shards plus the held-out evaluation set.
struct FederatedData {
  std::vector<Dataset> local;
  Dataset test;
};

FederatedData prepare_data(const ExperimentConfig& config, std::uint64_t seed);

struct RoundView {
  std::size_t round;
  const AgeVector& ages;  // T[t], before the update
  const ChannelRealization& realization;
  const ScheduleDecision& decision;
  const AgeVector& next_ages;  // T[t+1]
};

using RoundObserver = std::function<void(const RoundView&)>;

// Runs config.rounds rounds with config.seed. Throws ConfigError before the
// first round on invalid configuration, InvariantViolation if a round breaks
// a scheduling or age invariant.
RunResult run(const ExperimentConfig& config, const RoundObserver& observer = {});

// Same as run() but with already prepared data (lets callers reuse one
// dataset across policies).
RunResult run(const ExperimentConfig& config, const FederatedData& data,
              const RoundObserver& observer = {});

// One run per seed, returned in seed-list order. `threads` = 0 picks the
// hardware concurrency. Output does not depend on the thread count.
std::vector<RunResult> sweep(const ExperimentConfig& config,
                             const std::vector<std::uint64_t>& seeds, std::size_t threads = 1);

// Thread cap from AOU_FEDSCHED_THREADS (0 or unset = auto).
std::size_t threads_from_env();

// Rate target at which roughly `infeasible_share` of UEs cannot reach R_s with
// the whole spectrum. Pools per-UE maximum rates over `rounds` fading draws of
// every seed's topology and returns the matching quantile.
double rate_target_for_infeasible_share(const ExperimentConfig& config,
                                        const std::vector<std::uint64_t>& seeds,
                                        double infeasible_share, std::size_t rounds);

}  // namespace aou
