#pragma once

#include <string>
#include <vector>

#include "fan/runner.hpp"

namespace fan {

/// Applies `key = value` lines from a config file on top of `base`, then the
/// `key=value` override pairs. Unknown keys, malformed numbers, and bad enum
/// values are rejected with the offending line/position. The format accepted
/// here is exactly what describe() emits, so resolved echoes re-parse.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides,
                                   ExperimentConfig base = {});

ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides,
                              ExperimentConfig base = {});

}  // namespace fan
