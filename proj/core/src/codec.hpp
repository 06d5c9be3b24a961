#pragma once

// JSON encodings shared by the trace, unit-test, candidate and report files.
// Private to the library: the public headers stay free of nlohmann types.

#include <json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unitcarve/carver.hpp"
#include "unitcarve/coverage.hpp"
#include "unitcarve/memgraph.hpp"
#include "unitcarve/outcome.hpp"
#include "unitcarve/parameterizer.hpp"
#include "unitcarve/system_input.hpp"

namespace unitcarve::codec {

using json = nlohmann::json;

// Raised for structurally invalid documents; callers add file/line context.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_hex(std::span<const uint8_t> bytes);
std::string to_hex(std::string_view bytes);
std::vector<uint8_t> from_hex(std::string_view hex);
std::string string_from_hex(std::string_view hex);

std::string double_bits(double d);
double double_from_bits(std::string_view hex);

json encode(const Value& v);
Value decode_value(const json& j);

json encode(const RootValue& v);
RootValue decode_root_value(const json& j);

json encode(const MemoryGraph& g);
MemoryGraph decode_graph(const json& j);

json encode(const SetupPlan& p);
SetupPlan decode_plan(const json& j);

json encode(const Outcome& o);
Outcome decode_outcome(const json& j);

json encode(const SystemInput& in);
SystemInput decode_input(const json& j);

json encode(const BranchSet& s);
BranchSet decode_branches(const json& j);
BranchId decode_branch(std::string_view text);

json encode(const CoverageMap& c);
CoverageMap decode_coverage(const json& j);

TypeRef decode_type(const json& j);
json encode_type(const TypeRef& t);

// Field accessors with a DecodeError naming the missing key.
const json& field(const json& j, const char* key);
std::string get_string(const json& j, const char* key);
int64_t get_int(const json& j, const char* key);
bool get_bool(const json& j, const char* key);

// Parses one JSON document; wraps parser errors in DecodeError.
json parse(std::string_view text);

// Calls `decode` on every non-blank line; errors carry the line number.
template <typename F>
void for_each_line(std::string_view text, F&& decode) {
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      decode(parse(line));
    } catch (const DecodeError& e) {
      throw TraceFormatError(line_no, e.what());
    } catch (const json::exception& e) {
      throw TraceFormatError(line_no, e.what());
    }
  }
}

// Defined next to the types they encode.
json encode(const UnitTest& t);
UnitTest decode_unit(const json& j);

json encode(const ParamValue& v);
ParamValue decode_param_value(const json& j);
json encode(const Parameter& p);
Parameter decode_parameter(const json& j);
json encode(const ParameterizedUnitTest& t);
ParameterizedUnitTest decode_put(const json& j);
json encode(const ParamBinding& b);
ParamBinding decode_binding(const json& j);

}  // namespace unitcarve::codec
