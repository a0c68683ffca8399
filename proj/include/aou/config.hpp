// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string_view>

#include "aou/simulation.hpp"

namespace aou {

// JSON experiment configuration. Every key is optional; missing keys keep the
// ExperimentConfig defaults. Unknown keys, wrong types and invalid values
// raise ConfigError with the dotted key path in the message.
ExperimentConfig parse_config_text(std::string_view json_text);
ExperimentConfig parse_config(const std::filesystem::path& path);

}  // namespace aou
