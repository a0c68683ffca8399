// SPDX-License-Identifier: Apache-2.0
#include "aou/metrics_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "aou/error.hpp"

namespace aou {

std::string format_sig6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

void write_metrics_csv(std::ostream& out, std::span<const RunResult> results) {
  if (results.empty()) throw ContractViolation("write_metrics_csv: no results");
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].seed < results[b].seed; });

  out << kMetricsHeader << '\n';
  for (std::size_t i : order) {
    const RunResult& r = results[i];
    const std::string_view policy = policy_name(r.config.policy);
    for (const RoundMetrics& m : r.rounds) {
      out << m.round << ',' << policy << ',' << r.seed << ',' << format_sig6(m.accuracy) << ','
          << m.scheduled << ',' << format_sig6(m.mean_aou) << ',' << m.max_aou << ','
          << format_sig6(m.objective) << '\n';
    }
  }
}

void emit_metrics(std::span<const RunResult> results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_metrics_csv(out, results);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace aou
