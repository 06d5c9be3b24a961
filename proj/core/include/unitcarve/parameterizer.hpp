#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unitcarve/carver.hpp"
#include "unitcarve/system_input.hpp"
#include "unitcarve/vm.hpp"

namespace unitcarve {

struct InputSpan {
  std::string source;
  int64_t start = 0;  // inclusive
  int64_t end = 0;    // exclusive

  bool overlaps(const InputSpan& o) const { return source == o.source && start < o.end && o.start < end; }
  friend bool operator==(const InputSpan&, const InputSpan&) = default;
};

enum class ParamKind { String, Int, Float };

std::string_view param_kind_name(ParamKind k);
ParamKind param_kind_from_name(std::string_view name);

// A bound parameter value: integer, binary64, or raw string bytes.
using ParamValue = std::variant<int64_t, double, std::string>;

bool same_value(const ParamValue& a, const ParamValue& b);  // doubles compare by bits
std::string describe(const ParamValue& v);

// Where a parameter lives in the carved context.
struct ParamLocation {
  enum class Kind { Arg, Global, NodeField, NodeString };

  Kind kind = Kind::Arg;
  int arg_index = -1;  // Arg
  std::string global;  // Global
  NodeId node = 0;     // NodeField, NodeString
  int64_t offset = 0;  // NodeField
};

struct Parameter {
  int slot = 0;
  ParamLocation location;
  std::string path;   // access path, for reports
  ParamKind kind = ParamKind::Int;
  ParamValue original;
  std::string text;   // bytes found at `span`
  InputSpan span;
};

struct ParameterizedUnitTest {
  UnitTest base;
  std::vector<Parameter> parameters;
};

struct ParamBinding {
  std::vector<ParamValue> values;  // by slot
  std::string mutator;             // "original" or the strategies applied
  uint64_t seed = 0;
};

// Decimal text of an integer; shortest round-tripping text of a double.
std::string numeric_repr(int64_t v);
std::string numeric_repr(double v);
std::string render(const ParamValue& v);

// Texts a value may appear as in the input: the canonical rendering, plus the
// integer form for integral doubles.
std::vector<std::string> match_texts(const ParamValue& v);

// Leftmost occurrence in the first source (declaration order) that has one.
std::optional<InputSpan> match_text(std::string_view text, const SystemInput& input);
std::optional<InputSpan> match_value(const ParamValue& v, const SystemInput& input);

// Walks arguments, then reachable globals, then the heap nodes they reach,
// and turns every value found verbatim in `input` into a parameter. A string
// node is visited from the first pointer field that reaches it; record
// fields are taken in layout order; later spans overlapping an earlier one
// are skipped.
ParameterizedUnitTest parameterize(const Program& program, const UnitTest& test, const SystemInput& input);

ParamBinding original_binding(const ParameterizedUnitTest& test);

// Setup plan with each parameter replaced by its bound value. A string
// parameter replaces the node's content (the bytes before the first zero)
// and keeps the rest; pointers past the content are shifted accordingly.
SetupPlan apply_binding(const ParameterizedUnitTest& test, const ParamBinding& binding);

RunResult run_unit(const Program& program, const ParameterizedUnitTest& test, const ParamBinding& binding,
                   const Limits& limits = Limits::unit(), const RunOptions& options = {});

// `*.put.jsonl`: one parameterized test per line.
std::string serialize_puts(const std::vector<ParameterizedUnitTest>& tests);
std::vector<ParameterizedUnitTest> deserialize_puts(std::string_view text);

}  // namespace unitcarve
