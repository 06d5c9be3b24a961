#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "unitcarve/coverage.hpp"
#include "unitcarve/memgraph.hpp"
#include "unitcarve/outcome.hpp"
#include "unitcarve/system_input.hpp"

namespace unitcarve {

// Function entry. The graph's roots are the arguments ("arg0", ...) followed
// by every global as of this entry.
struct CallEvent {
  int64_t seq = 0;
  std::string callee;
  std::string input_ref;
  bool completed = false;  // the invocation returned normally
  BranchSet footprint;     // arms of `callee` taken during this invocation
  MemoryGraph graph;
};

// Store to a global (possibly through nested fields or pointers); the whole
// root global is re-snapshotted.
struct GlobalUpdate {
  int64_t seq = 0;
  std::string name;
  MemoryGraph graph;  // single root named `name`
};

struct TraceEnd {
  Outcome outcome;
  SystemInput input;
  std::string output;
};

struct Trace {
  std::vector<CallEvent> calls;
  std::vector<GlobalUpdate> globals;
  std::optional<TraceEnd> end;

  const CallEvent* find_call(int64_t seq) const;
  std::vector<const CallEvent*> calls_to(std::string_view callee) const;
};

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// JSON Lines, records ordered by seq, `end` last. See docs/trace-format.md.
std::string serialize_trace(const Trace& trace);
Trace deserialize_trace(std::string_view text);

// Value of every global as of just before event `at_seq`: initial values
// from `initial` (the first event's globals or the initializers) overridden by
// the last update with seq < at_seq. Each entry is a one-root graph.
std::map<std::string, MemoryGraph> fold_globals(const std::map<std::string, MemoryGraph>& initial,
                                                const std::vector<GlobalUpdate>& updates,
                                                int64_t at_seq);

// Splits the global roots of a call graph into one-root graphs (dropping
// nodes each global cannot reach), for comparison with fold_globals.
std::map<std::string, MemoryGraph> split_globals(const MemoryGraph& graph);

// Sub-graph reachable from the kept roots, with nodes renumbered in
// discovery order.
MemoryGraph restrict_roots(const MemoryGraph& graph, const std::vector<std::string>& keep);

}  // namespace unitcarve
