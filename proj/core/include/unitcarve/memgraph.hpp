#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "unitcarve/memory.hpp"
#include "unitcarve/segment_map.hpp"
#include "unitcarve/types.hpp"
#include "unitcarve/value.hpp"

namespace unitcarve {

using NodeId = uint32_t;

struct NodeBudget {
  int64_t max_nodes = 4096;
  int64_t max_bytes = 65536;

  static NodeBudget unlimited() { return {INT64_MAX, INT64_MAX}; }
};

// Pointer slot inside a node. `target` is empty when dumping stopped there.
struct GraphEdge {
  int64_t at = 0;
  std::optional<NodeId> target;
  int64_t target_offset = 0;
  bool truncated = false;
  std::string path;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

// One segment, dumped whole. Interior pointers are edges with a non-zero
// target offset into the same node.
struct GraphNode {
  NodeId id = 0;
  Origin origin = Origin::Heap;
  std::string global;
  TypeRef type;  // element type the segment is viewed as; null when unknown
  int64_t length = 0;
  bool live = true;
  std::vector<uint8_t> bytes;
  std::vector<GraphEdge> edges;  // ascending `at`
  std::string path;              // first access path that reached the node
};

// How a root holds its value.
struct RootValue {
  enum class Kind {
    Immediate,  // int/char/double argument or global
    Null,       // null pointer
    Ref,        // pointer into node (node, offset)
    Storage,    // aggregate global whose storage is the node
    Truncated,  // pointer whose target was not dumped
  };

  Kind kind = Kind::Immediate;
  Value immediate;
  NodeId node = 0;
  int64_t offset = 0;

  static RootValue of_immediate(Value v) { return {Kind::Immediate, v, 0, 0}; }
  static RootValue null() { return {Kind::Null, {}, 0, 0}; }
  static RootValue ref(NodeId n, int64_t off) { return {Kind::Ref, {}, n, off}; }
  static RootValue storage(NodeId n) { return {Kind::Storage, {}, n, 0}; }
  static RootValue truncated() { return {Kind::Truncated, {}, 0, 0}; }
};

bool operator==(const RootValue& a, const RootValue& b);

struct GraphRoot {
  std::string name;    // "arg0", "arg1", ... or the global's name
  int arg_index = -1;  // >= 0 for arguments
  TypeRef type;
  RootValue value;

  bool is_arg() const { return arg_index >= 0; }
};

struct MemoryGraph {
  std::vector<GraphNode> nodes;  // node id == index + 1
  std::vector<GraphRoot> roots;
  bool truncated = false;
  std::vector<std::string> truncated_paths;

  const GraphNode& node(NodeId id) const { return nodes.at(id - 1); }
  GraphNode& node(NodeId id) { return nodes.at(id - 1); }
  const GraphRoot* find_root(std::string_view name) const;
  GraphRoot* find_root(std::string_view name);
  int64_t total_bytes() const;
};

// Root handed to snapshot(). Aggregate globals pass a pointer to their storage.
struct SnapshotRoot {
  std::string name;
  int arg_index = -1;
  TypeRef type;
  Value value;
};

// Breadth-first dump of everything reachable from `roots`. Roots are
// visited in order, then nodes in discovery order, pointer slots in offset
// order. Exceeding `budget` marks the graph truncated and records where.
MemoryGraph snapshot(const Memory& memory, std::span<const SnapshotRoot> roots,
                     NodeBudget budget = {});

// Element type of node slots, from the node's type; null if unknown.
TypeRef slot_type_at(const RecordTable& records, const GraphNode& node, int64_t at);

struct TrimResult {
  std::vector<uint8_t> primary;
  std::optional<std::vector<uint8_t>> alt;
};

// Char data is never assumed to be terminated: `primary` is the full dump,
// `alt` the prefix through the first zero byte when there is one.
TrimResult trim_trailing_garbage(std::span<const uint8_t> bytes);

// ------------------------------------------------------------- setup plans

struct PlanAllocate {
  NodeId node = 0;
  int64_t length = 0;
  Origin origin = Origin::Heap;
  std::string global;  // Origin::Global: bind to this global's storage
  bool live = true;
  TypeRef hint;
};
struct PlanWriteBytes {
  NodeId node = 0;
  int64_t offset = 0;
  std::vector<uint8_t> bytes;
};
struct PlanWritePointer {
  NodeId node = 0;
  int64_t offset = 0;
  NodeId target = 0;
  int64_t target_offset = 0;
};
struct PlanSetGlobal {
  std::string name;
  TypeRef type;
  RootValue value;
};
struct PlanBindArg {
  int position = 0;
  TypeRef type;
  RootValue value;
};

using PlanStep = std::variant<PlanAllocate, PlanWriteBytes, PlanWritePointer, PlanSetGlobal, PlanBindArg>;

struct SetupPlan {
  std::vector<PlanStep> steps;
  bool truncated = false;  // refuses to execute
  std::vector<std::string> truncated_paths;

  size_t count_allocations() const;
  size_t count_byte_writes() const;
  size_t count_pointer_writes() const;
  size_t count_bind_args() const;
  size_t count_set_globals() const;
};

// Two passes: allocate every node, then fill bytes and patch pointers; globals
// and arguments are bound last.
SetupPlan plan_reconstruction(const MemoryGraph& graph);

class SetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Materialized {
  std::vector<SegmentId> node_segments;  // index = node id - 1
  std::vector<Value> args;               // by position
};

// Executes a plan against `memory`. `global_storage` maps a global name to
// its segment. Throws SetupError for truncated plans or inconsistent steps.
Materialized materialize(const SetupPlan& plan, Memory& memory,
                         const std::function<SegmentId(const std::string&)>& global_storage);

}  // namespace unitcarve
