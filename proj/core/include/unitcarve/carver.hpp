#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "unitcarve/coverage.hpp"
#include "unitcarve/memgraph.hpp"
#include "unitcarve/program.hpp"
#include "unitcarve/system_input.hpp"
#include "unitcarve/trace.hpp"
#include "unitcarve/value.hpp"
#include "unitcarve/vm.hpp"

namespace unitcarve {

enum class StringVariant { Single, Full, Terminated };

std::string_view variant_name(StringVariant v);
StringVariant variant_from_name(std::string_view name);

// One recorded invocation turned into data: the context graph (restricted to
// the arguments and the globals the callee can reach), the setup plan that
// rebuilds it, and the recorded branch footprint of the callee.
struct UnitTest {
  std::string id;
  std::string program;  // path of the program file, when known
  std::string callee;
  std::string trace_id;
  int64_t seq = 0;
  SystemInput input;  // input of the originating system run
  MemoryGraph graph;
  SetupPlan plan;
  StringVariant string_variant = StringVariant::Single;
  bool setup_error = false;  // context truncated; kept for statistics only
  bool completed = false;    // the recorded invocation returned normally
  BranchSet footprint;
  std::vector<std::string> reachable_globals;  // declaration order
  std::vector<RootValue> recorded_args;  // by position, in graph terms
};

struct CarveOptions {
  std::optional<std::set<std::string>> filter;
  std::string trace_id;  // defaults to the event's input reference
  std::string program_path;
  Limits replay_limits = Limits::unit();
};

// One UnitTest per call event (in seq order), restricted by `filter`.
std::vector<UnitTest> carve(const Trace& trace, const Program& program, const CarveOptions& options = {});

// Least fixed point over the static call graph, seeded with `f`.
// MiniC has no function pointers, so the context adds nothing yet.
std::set<std::string> reachable_functions(const Program& program, std::string_view f,
                                          const MemoryGraph* context = nullptr);

// Globals loaded or stored by any reachable function.
std::set<std::string> reachable_globals(const Program& program, std::string_view f,
                                        const MemoryGraph* context = nullptr);

// Branch arms of the callee when the test is replayed with its recorded values.
RunResult replay(const Program& program, const UnitTest& test, const Limits& limits = Limits::unit());

// Char nodes that may be cut back to their zero-terminated prefix: live,
// pointer-free, not global storage, and no pointer into them past the cut.
MemoryGraph terminated_variant(const MemoryGraph& graph, bool* changed = nullptr);

// `*.unit.jsonl`: one test per line.
std::string serialize_units(const std::vector<UnitTest>& tests);
std::vector<UnitTest> deserialize_units(std::string_view text);

}  // namespace unitcarve
