#include "unitcarve/memgraph.hpp"

#include <deque>
#include <unordered_map>

namespace unitcarve {

bool operator==(const RootValue& a, const RootValue& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case RootValue::Kind::Immediate:
      return a.immediate == b.immediate;
    case RootValue::Kind::Ref:
      return a.node == b.node && a.offset == b.offset;
    case RootValue::Kind::Storage:
      return a.node == b.node;
    default:
      return true;
  }
}

const GraphRoot* MemoryGraph::find_root(std::string_view name) const {
  for (const auto& r : roots) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

GraphRoot* MemoryGraph::find_root(std::string_view name) {
  for (auto& r : roots) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

int64_t MemoryGraph::total_bytes() const {
  int64_t n = 0;
  for (const auto& node : nodes) n += static_cast<int64_t>(node.bytes.size());
  return n;
}

TypeRef slot_type_at(const RecordTable& records, const GraphNode& node, int64_t at) {
  if (!node.type || node.type->kind == MiniType::Kind::Void) return nullptr;
  int64_t size = records.size_of(*node.type);
  if (size <= 0) return nullptr;
  auto slot = records.scalar_at(node.type, at % size);
  return slot ? slot->type : nullptr;
}

namespace {

// Access paths past this length restart from the node id, so long chains
// do not cost quadratic time and space.
constexpr size_t kMaxPath = 128;

// Access path of the slot at byte `at` inside `node`, for diagnostics.
std::string slot_path(const RecordTable& records, const GraphNode& node, int64_t at) {
  std::string base = node.path.size() > kMaxPath ? "node" + std::to_string(node.id) : node.path;
  if (!node.type || node.type->kind == MiniType::Kind::Void) {
    return base + "+" + std::to_string(at);
  }
  int64_t size = records.size_of(*node.type);
  if (size <= 0) return base + "+" + std::to_string(at);
  int64_t index = at / size;
  auto slot = records.scalar_at(node.type, at % size);
  std::string inner = slot ? slot->path : "+" + std::to_string(at % size);
  if (node.length == size && index == 0) {
    if (inner.starts_with(".")) return base + "->" + inner.substr(1);
    return "*" + base + inner;
  }
  return base + "[" + std::to_string(index) + "]" + inner;
}

class Snapshotter {
 public:
  Snapshotter(const Memory& memory, NodeBudget budget) : memory_(memory), budget_(budget) {}

  MemoryGraph run(std::span<const SnapshotRoot> roots) {
    for (const auto& root : roots) {
      GraphRoot out{root.name, root.arg_index, root.type, {}};
      if (root.type->is_aggregate()) {
        auto node = node_for(root.value.p, root.type, root.name);
        out.value = node ? RootValue::storage(*node) : RootValue::truncated();
      } else if (root.type->is_pointer()) {
        const Pointer& p = root.value.p;
        if (p.is_null()) {
          out.value = RootValue::null();
        } else {
          auto node = node_for(p, root.type->elem, root.name);
          out.value = node ? RootValue::ref(*node, p.offset) : RootValue::truncated();
        }
      } else {
        out.value = RootValue::of_immediate(convert_value(root.value, *root.type));
      }
      graph_.roots.push_back(std::move(out));
    }
    while (!queue_.empty()) {
      NodeId id = queue_.front();
      queue_.pop_front();
      fill(id);
    }
    return std::move(graph_);
  }

 private:
  std::optional<NodeId> node_for(Pointer p, const TypeRef& pointee, const std::string& path) {
    auto it = by_segment_.find(p.segment);
    if (it != by_segment_.end()) return it->second;
    const SegmentInfo* info = memory_.map().find(p.segment);
    if (!info) {
      stop(path);
      return std::nullopt;
    }
    int64_t bytes = info->live ? info->length : 0;
    if (static_cast<int64_t>(graph_.nodes.size()) + 1 > budget_.max_nodes ||
        bytes_ + bytes > budget_.max_bytes) {
      stop(path);
      return std::nullopt;
    }
    const auto& data = memory_.data(p.segment);
    GraphNode node;
    node.id = static_cast<NodeId>(graph_.nodes.size() + 1);
    node.origin = info->origin;
    node.global = data.global;
    if (data.hint) {
      node.type = data.hint;
    } else if (pointee && pointee->kind != MiniType::Kind::Void) {
      node.type = pointee;
    }
    node.length = info->length;
    node.live = info->live;
    node.path = path;
    bytes_ += bytes;
    by_segment_.emplace(p.segment, node.id);
    segment_of_.push_back(p.segment);
    graph_.nodes.push_back(std::move(node));
    queue_.push_back(graph_.nodes.back().id);
    return graph_.nodes.back().id;
  }

  void fill(NodeId id) {
    SegmentId seg = segment_of_[id - 1];
    if (!graph_.node(id).live) return;
    const auto& data = memory_.data(seg);
    graph_.node(id).bytes = data.bytes;
    for (const auto& [at, target] : data.pointers) {
      GraphEdge edge;
      edge.at = at;
      edge.path = slot_path(memory_.records(), graph_.node(id), at);
      TypeRef slot = slot_type_at(memory_.records(), graph_.node(id), at);
      TypeRef pointee = slot && slot->is_pointer() ? slot->elem : nullptr;
      auto node = node_for(target, pointee, edge.path);
      if (node) {
        edge.target = *node;
        edge.target_offset = target.offset;
      } else {
        edge.truncated = true;
      }
      graph_.node(id).edges.push_back(std::move(edge));
    }
  }

  void stop(const std::string& path) {
    graph_.truncated = true;
    graph_.truncated_paths.push_back(path);
  }

  const Memory& memory_;
  NodeBudget budget_;
  MemoryGraph graph_;
  int64_t bytes_ = 0;
  std::unordered_map<SegmentId, NodeId> by_segment_;
  std::vector<SegmentId> segment_of_;
  std::deque<NodeId> queue_;
};

}  // namespace

MemoryGraph snapshot(const Memory& memory, std::span<const SnapshotRoot> roots, NodeBudget budget) {
  return Snapshotter(memory, budget).run(roots);
}

TrimResult trim_trailing_garbage(std::span<const uint8_t> bytes) {
  TrimResult out;
  out.primary.assign(bytes.begin(), bytes.end());
  for (size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == 0) {
      out.alt = std::vector<uint8_t>(bytes.begin(), bytes.begin() + static_cast<ptrdiff_t>(i) + 1);
      break;
    }
  }
  return out;
}

namespace {

template <typename T>
size_t count_steps(const std::vector<PlanStep>& steps) {
  size_t n = 0;
  for (const auto& s : steps) n += std::holds_alternative<T>(s) ? 1 : 0;
  return n;
}

}  // namespace

size_t SetupPlan::count_allocations() const { return count_steps<PlanAllocate>(steps); }
size_t SetupPlan::count_byte_writes() const { return count_steps<PlanWriteBytes>(steps); }
size_t SetupPlan::count_pointer_writes() const { return count_steps<PlanWritePointer>(steps); }
size_t SetupPlan::count_bind_args() const { return count_steps<PlanBindArg>(steps); }
size_t SetupPlan::count_set_globals() const { return count_steps<PlanSetGlobal>(steps); }

SetupPlan plan_reconstruction(const MemoryGraph& graph) {
  SetupPlan plan;
  plan.truncated = graph.truncated;
  plan.truncated_paths = graph.truncated_paths;
  for (const auto& node : graph.nodes) {
    plan.steps.emplace_back(
        PlanAllocate{node.id, node.length, node.origin, node.global, node.live, node.type});
  }
  for (const auto& node : graph.nodes) {
    if (!node.live || node.bytes.empty()) continue;
    plan.steps.emplace_back(PlanWriteBytes{node.id, 0, node.bytes});
  }
  for (const auto& node : graph.nodes) {
    for (const auto& edge : node.edges) {
      if (!edge.target) continue;
      plan.steps.emplace_back(PlanWritePointer{node.id, edge.at, *edge.target, edge.target_offset});
    }
  }
  for (const auto& root : graph.roots) {
    if (root.is_arg()) continue;
    plan.steps.emplace_back(PlanSetGlobal{root.name, root.type, root.value});
  }
  for (const auto& root : graph.roots) {
    if (!root.is_arg()) continue;
    plan.steps.emplace_back(PlanBindArg{root.arg_index, root.type, root.value});
  }
  return plan;
}

namespace {

Value resolve(const RootValue& v, const std::vector<SegmentId>& segs) {
  switch (v.kind) {
    case RootValue::Kind::Immediate:
      return v.immediate;
    case RootValue::Kind::Null:
      return Value::of_pointer({});
    case RootValue::Kind::Ref:
    case RootValue::Kind::Storage:
      if (v.node == 0 || v.node > segs.size() || segs[v.node - 1] == 0) {
        throw SetupError("reference to unallocated node " + std::to_string(v.node));
      }
      return Value::of_pointer({segs[v.node - 1], v.offset});
    case RootValue::Kind::Truncated:
      break;
  }
  throw SetupError("value lies in a truncated region");
}

}  // namespace

Materialized materialize(const SetupPlan& plan, Memory& memory,
                         const std::function<SegmentId(const std::string&)>& global_storage) {
  if (plan.truncated) {
    std::string where = plan.truncated_paths.empty() ? "?" : plan.truncated_paths.front();
    throw SetupError("context was truncated at " + where);
  }
  Materialized out;
  auto& segs = out.node_segments;
  auto seg_of = [&](NodeId id) {
    if (id == 0 || id > segs.size() || segs[id - 1] == 0) {
      throw SetupError("step refers to unallocated node " + std::to_string(id));
    }
    return segs[id - 1];
  };
  try {
    for (const auto& step : plan.steps) {
      if (const auto* a = std::get_if<PlanAllocate>(&step)) {
        if (a->node != segs.size() + 1) throw SetupError("allocation out of order");
        SegmentId id = 0;
        if (a->origin == Origin::Global && !a->global.empty()) {
          id = global_storage(a->global);
          if (id == 0) throw SetupError("unknown global '" + a->global + "'");
          if (memory.map().find(id)->length != a->length) {
            throw SetupError("global '" + a->global + "' changed size");
          }
        } else {
          id = memory.allocate(a->length, a->origin, a->hint);
          if (!a->live) memory.kill(id);
        }
        segs.push_back(id);
      } else if (const auto* w = std::get_if<PlanWriteBytes>(&step)) {
        memory.write_bytes(seg_of(w->node), w->offset, w->bytes);
      } else if (const auto* p = std::get_if<PlanWritePointer>(&step)) {
        memory.write_pointer(seg_of(p->node), p->offset, {seg_of(p->target), p->target_offset});
      } else if (const auto* g = std::get_if<PlanSetGlobal>(&step)) {
        if (g->value.kind == RootValue::Kind::Storage) continue;  // bound at allocation
        SegmentId id = global_storage(g->name);
        if (id == 0) throw SetupError("unknown global '" + g->name + "'");
        memory.store({id, 0}, *g->type, resolve(g->value, segs));
      } else if (const auto* b = std::get_if<PlanBindArg>(&step)) {
        if (b->position < 0) throw SetupError("negative argument position");
        if (out.args.size() <= static_cast<size_t>(b->position)) out.args.resize(b->position + 1);
        out.args[b->position] = convert_value(resolve(b->value, segs), *b->type);
      }
    }
  } catch (const Trap& t) {
    throw SetupError("setup write failed: " + t.detail);
  }
  return out;
}

}  // namespace unitcarve
