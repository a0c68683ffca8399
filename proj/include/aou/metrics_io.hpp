// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "aou/simulation.hpp"

namespace aou {

inline constexpr const char* kMetricsHeader =
    "round,policy,seed,accuracy,scheduled,mean_aou,max_aou,objective";

// %.6g
std::string format_sig6(double value);

// One row per (seed, round), sorted by seed then round. Throws
// ContractViolation on an empty result list.
void write_metrics_csv(std::ostream& out, std::span<const RunResult> results);

// Throws std::runtime_error when the file cannot be written.
void emit_metrics(std::span<const RunResult> results, const std::filesystem::path& path);

}  // namespace aou
