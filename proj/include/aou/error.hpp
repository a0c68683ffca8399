// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace aou {

// Invalid experiment or component configuration. The message names the
// offending key when one exists.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (length mismatch, unsorted input...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or truncated input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A per-round invariant failed inside the simulator.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aou
