#pragma once

// JSON documents for the standalone files the tool reads and writes.
// Decoders throw std::runtime_error with a description on malformed input.

#include <string>
#include <string_view>

#include "unitcarve/coverage.hpp"
#include "unitcarve/system_input.hpp"

namespace unitcarve {

std::string coverage_to_json(const CoverageMap& coverage);
CoverageMap coverage_from_json(std::string_view text);

// {"sources":[{"name":"stdin","hex":"..."}]}
std::string input_to_json(const SystemInput& input);
SystemInput input_from_json(std::string_view text);

}  // namespace unitcarve
