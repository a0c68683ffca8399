// SPDX-License-Identifier: Apache-2.0
//
// aou-fedsched: run federated-learning scheduling experiments from a JSON
// config and write per-round metrics as CSV.
//
//   aou-fedsched run --config configs/desk.json --policy maxpack --output m.csv
//   aou-fedsched sweep --config configs/desk.json --seeds 1,2,3
//   aou-fedsched inspect-alloc --config configs/desk.json --round 4
//   aou-fedsched gen-data --config configs/desk.json --output data.csv

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aou/allocation.hpp"
#include "aou/config.hpp"
#include "aou/error.hpp"
#include "aou/learning.hpp"
#include "aou/metrics_io.hpp"
#include "aou/scheduler.hpp"
#include "aou/simulation.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<std::size_t> rounds;
  std::string output;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--policy", o.policy, "abs | maxpack | round_robin | random");
  cmd->add_option("--rounds", o.rounds, "number of communication rounds");
  cmd->add_option("--output", o.output, "output path (default: stdout)");
}

aou::ExperimentConfig load(const Overrides& o) {
  aou::ExperimentConfig c = aou::parse_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.policy) c.policy = aou::parse_policy(*o.policy);
  if (o.rounds) c.rounds = *o.rounds;
  c.validate();
  return c;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string join_channels(const aou::Allocation& a) {
  std::string s;
  for (std::size_t i = 0; i < a.channels.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(a.channels[i]);
  }
  return s;
}

std::string join_powers(const aou::Allocation& a) {
  std::string s;
  for (std::size_t i = 0; i < a.powers.size(); ++i) {
    if (i) s += ';';
    s += aou::format_sig6(a.powers[i]);
  }
  return s;
}

int inspect_alloc(const Overrides& o, std::size_t round) {
  aou::ExperimentConfig c = load(o);
  if (round >= c.rounds) {
    std::cerr << "inspect-alloc: --round " << round << " outside [0, " << c.rounds << ")\n";
    return 2;
  }
  c.rounds = round + 1;

  std::optional<aou::AgeVector> ages;
  std::optional<aou::ChannelRealization> realization;
  std::optional<aou::ScheduleDecision> decision;
  aou::run(c, [&](const aou::RoundView& v) {
    if (v.round != round) return;
    ages = v.ages;
    realization = v.realization;
    decision = v.decision;
  });

  std::vector<std::size_t> all(c.num_subchannels());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const aou::CandidateList candidates = aou::build_candidate_list(*realization, all, c.radio);

  std::vector<int> order(c.num_ues, -1);
  for (std::size_t i = 0; i < decision->allocations.size(); ++i) {
    order[decision->allocations[i].ue_id] = static_cast<int>(i);
  }

  std::cout << "round " << round << "  policy " << aou::policy_name(c.policy) << "  seed "
            << c.seed << "  R_s " << c.radio.rate_target << "  alpha " << c.fairness.alpha
            << "\n\ncandidates over the full spectrum:\n";
  std::cout << std::left << std::setw(6) << "ue" << std::setw(5) << "age" << std::setw(7)
            << "n*" << std::setw(14) << "rate" << std::setw(14) << "score"
            << "channels\n";
  for (const auto& a : candidates.allocations) {
    const double score =
        aou::f_alpha(static_cast<double>(ages->ages[a.ue_id]), c.fairness.alpha) /
        static_cast<double>(a.count());
    std::cout << std::setw(6) << a.ue_id << std::setw(5) << ages->ages[a.ue_id] << std::setw(7)
              << a.count() << std::setw(14) << aou::format_sig6(a.rate) << std::setw(14)
              << aou::format_sig6(score) << join_channels(a) << '\n';
  }
  std::cout << "\nselection order:\n";
  for (std::size_t i = 0; i < decision->allocations.size(); ++i) {
    const auto& a = decision->allocations[i];
    std::cout << "  " << i << ": ue " << a.ue_id << "  channels " << join_channels(a)
              << "  powers " << join_powers(a) << "  rate " << aou::format_sig6(a.rate)
              << "  score " << aou::format_sig6(decision->scores[i]) << '\n';
  }
  std::cout << "objective " << aou::format_sig6(decision->objective_value.value_or(0.0)) << '\n';

  if (!o.output.empty()) {
    with_output(o.output, [&](std::ostream& out) {
      out << "kind,ue_id,age,n_star,channels,powers,rate,score,selection_order\n";
      auto row = [&](const char* kind, const aou::Allocation& a, double score) {
        out << kind << ',' << a.ue_id << ',' << ages->ages[a.ue_id] << ',' << a.count() << ','
            << join_channels(a) << ',' << join_powers(a) << ',' << aou::format_sig6(a.rate)
            << ',' << aou::format_sig6(score) << ',' << order[a.ue_id] << '\n';
      };
      for (const auto& a : candidates.allocations) {
        row("candidate", a,
            aou::f_alpha(static_cast<double>(ages->ages[a.ue_id]), c.fairness.alpha) /
                static_cast<double>(a.count()));
      }
      for (std::size_t i = 0; i < decision->allocations.size(); ++i) {
        row("selected", decision->allocations[i], decision->scores[i]);
      }
    });
  }
  return 0;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size()) throw aou::ConfigError("--seeds: bad seed '" + item + "'");
    seeds.push_back(v);
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-update scheduling for wireless federated learning"};
  app.require_subcommand(1);

  Overrides o;
  std::string seeds_text;
  std::size_t inspect_round = 0;

  auto* run_cmd = app.add_subcommand("run", "run one experiment and write metrics CSV");
  add_common(run_cmd, o);
  auto* sweep_cmd = app.add_subcommand("sweep", "run one experiment per seed");
  add_common(sweep_cmd, o);
  sweep_cmd->add_option("--seeds", seeds_text, "comma-separated seeds (default: config seeds)");
  auto* inspect_cmd =
      app.add_subcommand("inspect-alloc", "dump one round's candidate list and schedule");
  add_common(inspect_cmd, o);
  inspect_cmd->add_option("--round", inspect_round, "round to inspect")->required();
  auto* gen_cmd = app.add_subcommand("gen-data", "write the synthetic dataset as CSV");
  add_common(gen_cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const aou::ExperimentConfig c = load(o);
      const std::vector<aou::RunResult> results{aou::run(c)};
      with_output(o.output, [&](std::ostream& out) { aou::write_metrics_csv(out, results); });
    } else if (sweep_cmd->parsed()) {
      const aou::ExperimentConfig c = load(o);
      std::vector<std::uint64_t> seeds = seeds_text.empty() ? c.seeds : parse_seed_list(seeds_text);
      if (seeds.empty()) seeds.push_back(c.seed);
      const auto results = aou::sweep(c, seeds, aou::threads_from_env());
      with_output(o.output, [&](std::ostream& out) { aou::write_metrics_csv(out, results); });
    } else if (inspect_cmd->parsed()) {
      return inspect_alloc(o, inspect_round);
    } else if (gen_cmd->parsed()) {
      const aou::ExperimentConfig c = load(o);
      if (c.data.source != aou::DataSource::kSynthetic) {
        throw aou::ConfigError("data.source: gen-data needs the synthetic source");
      }
      aou::RandomStream rng = aou::derive_stream(c.seed, aou::StreamPurpose::kDataGeneration);
      const auto data = aou::generate_synthetic(c.data.num_samples, c.data.dim, c.data.margin, rng,
                                                c.data.center_offset);
      with_output(o.output, [&](std::ostream& out) { aou::write_dataset_csv(out, data.data); });
    }
  } catch (const aou::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const aou::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
