#pragma once

// Shared helpers for the unit and acceptance tests: subject loading, a graph
// isomorphism oracle written independently of the snapshot code, and a
// random heap generator.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "unitcarve/memgraph.hpp"
#include "unitcarve/memory.hpp"
#include "unitcarve/program.hpp"
#include "unitcarve/rng.hpp"
#include "unitcarve/subjects.hpp"

namespace testkit {

using namespace unitcarve;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string subject_path(const std::string& name) {
  return std::string(UNITCARVE_SUBJECTS) + "/" + name + "/prog.mc";
}

inline const Program& subject(const std::string& name) {
  static std::map<std::string, Program> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, parse_program(read_file(subject_path(name)))).first;
  return it->second;
}

inline SystemInput stdin_input(std::string text) { return SystemInput::from_stdin(std::move(text)); }

// ------------------------------------------------------------ isomorphism

// Finds a bijection between the nodes of `a` and `b` that maps roots to
// roots and edges to edges, with equal bytes, lengths, origins, liveness and
// types. Every node of either graph must be reached from the roots. On
// failure `why` says where the graphs first differ.
class IsoCheck {
 public:
  IsoCheck(const MemoryGraph& a, const MemoryGraph& b) : a_(a), b_(b) {}

  bool run(std::string* why) {
    bool ok = check();
    if (!ok && why) *why = why_;
    return ok;
  }

 private:
  bool fail(std::string s) {
    why_ = std::move(s);
    return false;
  }

  bool pair(NodeId x, NodeId y) {
    auto fx = ab_.find(x);
    auto fy = ba_.find(y);
    if (fx != ab_.end() || fy != ba_.end()) {
      if (fx == ab_.end() || fy == ba_.end() || fx->second != y || fy->second != x) {
        return fail("node " + std::to_string(x) + " maps inconsistently");
      }
      return true;
    }
    ab_[x] = y;
    ba_[y] = x;
    work_.push_back(x);
    return true;
  }

  bool check() {
    if (a_.roots.size() != b_.roots.size()) return fail("root count");
    for (size_t i = 0; i < a_.roots.size(); ++i) {
      const auto& ra = a_.roots[i];
      const auto& rb = b_.roots[i];
      if (ra.name != rb.name || ra.arg_index != rb.arg_index) return fail("root " + ra.name + " name/position");
      if (!same_type(ra.type, rb.type)) return fail("root " + ra.name + " type");
      if (ra.value.kind != rb.value.kind) return fail("root " + ra.name + " kind");
      switch (ra.value.kind) {
        case RootValue::Kind::Immediate:
          if (!(ra.value.immediate == rb.value.immediate)) return fail("root " + ra.name + " value");
          break;
        case RootValue::Kind::Ref:
        case RootValue::Kind::Storage:
          if (ra.value.offset != rb.value.offset) return fail("root " + ra.name + " offset");
          if (!pair(ra.value.node, rb.value.node)) return false;
          break;
        default:
          break;
      }
    }
    while (!work_.empty()) {
      NodeId x = work_.back();
      work_.pop_back();
      if (x == 0 || x > a_.nodes.size() || ab_[x] == 0 || ab_[x] > b_.nodes.size()) return fail("bad node id");
      const GraphNode& na = a_.node(x);
      const GraphNode& nb = b_.node(ab_[x]);
      std::string at = "node " + std::to_string(x);
      if (na.origin != nb.origin) return fail(at + " origin");
      if (na.length != nb.length) return fail(at + " length");
      if (na.live != nb.live) return fail(at + " liveness");
      if (na.bytes != nb.bytes) return fail(at + " bytes");
      if (!same_type(na.type, nb.type)) return fail(at + " type");
      if (na.edges.size() != nb.edges.size()) return fail(at + " edge count");
      for (size_t e = 0; e < na.edges.size(); ++e) {
        const auto& ea = na.edges[e];
        const auto& eb = nb.edges[e];
        if (ea.at != eb.at) return fail(at + " edge offset");
        if (ea.target.has_value() != eb.target.has_value()) return fail(at + " edge truncation");
        if (!ea.target) continue;
        if (ea.target_offset != eb.target_offset) return fail(at + " edge target offset");
        if (!pair(*ea.target, *eb.target)) return false;
      }
    }
    if (ab_.size() != a_.nodes.size() || ba_.size() != b_.nodes.size()) return fail("unreached nodes");
    return true;
  }

  const MemoryGraph& a_;
  const MemoryGraph& b_;
  std::map<NodeId, NodeId> ab_;
  std::map<NodeId, NodeId> ba_;
  std::vector<NodeId> work_;
  std::string why_;
};

inline bool isomorphic(const MemoryGraph& a, const MemoryGraph& b, std::string* why = nullptr) {
  return IsoCheck(a, b).run(why);
}

// ------------------------------------------------------------ random heaps

// Layout used by the generator:
//   record Node { int key; Node* next; char tag; double w; Node* other; char* name; }
inline RecordTable heap_records() {
  RecordTable t;
  auto node_ptr = MiniType::pointer_to(MiniType::record_named("Node"));
  t.add({"Node",
         {{"key", MiniType::int_type(), 0},
          {"next", node_ptr, 8},
          {"tag", MiniType::char_type(), 16},
          {"w", MiniType::double_type(), 17},
          {"other", node_ptr, 25},
          {"name", MiniType::pointer_to(MiniType::char_type()), 33}},
         41});
  return t;
}

struct RandomHeap {
  std::vector<SegmentId> segments;
  std::vector<SnapshotRoot> roots;
};

// Between 1 and `max_nodes` segments: Node records and Node arrays, char
// and int arrays, and Node* arrays, some freed. Pointer slots go to random
// segments at random offsets (interior and one-past-end included), so the
// heap has cycles and sharing. Every segment is reachable from the roots.
inline RandomHeap random_heap(Memory& mem, Rng& rng, int max_nodes) {
  RandomHeap heap;
  auto node_t = MiniType::record_named("Node");
  auto node_ptr = MiniType::pointer_to(node_t);
  auto char_ptr = MiniType::pointer_to(MiniType::char_type());
  int n = static_cast<int>(rng.between(1, max_nodes));
  enum Shape { Rec, CharArr, IntArr, PtrArr };
  std::vector<Shape> shapes;
  for (int i = 0; i < n; ++i) {
    Shape s = static_cast<Shape>(rng.below(4));
    int64_t len = 0;
    TypeRef hint;
    switch (s) {
      case Rec:
        len = 41 * rng.between(1, 3);
        hint = node_t;
        break;
      case CharArr:
        len = rng.between(0, 24);
        hint = MiniType::char_type();
        break;
      case IntArr:
        len = 8 * rng.between(1, 4);
        hint = MiniType::int_type();
        break;
      case PtrArr:
        len = 8 * rng.between(1, 4);
        hint = node_ptr;
        break;
    }
    if (rng.below(8) == 0) hint = nullptr;
    SegmentId id = mem.allocate(len, Origin::Heap, hint);
    std::vector<uint8_t> bytes(static_cast<size_t>(len));
    for (auto& b : bytes) b = static_cast<uint8_t>(rng.below(256));
    mem.write_bytes(id, 0, bytes);
    heap.segments.push_back(id);
    shapes.push_back(s);
  }
  auto any_target = [&]() -> Pointer {
    SegmentId t = heap.segments[rng.below(heap.segments.size())];
    int64_t len = mem.map().find(t)->length;
    int64_t off = rng.below(3) == 0 ? rng.between(0, len) : 0;
    return {t, off};
  };
  for (size_t i = 0; i < heap.segments.size(); ++i) {
    SegmentId id = heap.segments[i];
    int64_t len = mem.map().find(id)->length;
    std::vector<int64_t> slots;
    if (shapes[i] == Rec) {
      for (int64_t base = 0; base < len; base += 41) {
        slots.push_back(base + 8);
        slots.push_back(base + 25);
        slots.push_back(base + 33);
      }
    } else if (shapes[i] == PtrArr) {
      for (int64_t at = 0; at < len; at += 8) slots.push_back(at);
    }
    for (int64_t at : slots) {
      if (rng.below(5) == 0) {
        mem.store({id, at}, *char_ptr, Value::of_pointer({}));
      } else {
        mem.write_pointer(id, at, any_target());
      }
    }
  }
  // Free some segments after wiring; pointers to them stay dangling.
  for (SegmentId id : heap.segments) {
    if (rng.below(10) == 0) mem.kill(id);
  }
  // Roots: a Node* to the first segment plus one to every segment that no
  // pointer slot reaches yet; that guarantees full reachability.
  std::vector<bool> reached(heap.segments.size() + 1, false);
  std::vector<SegmentId> order;
  auto index_of = [&](SegmentId s) {
    for (size_t i = 0; i < heap.segments.size(); ++i) {
      if (heap.segments[i] == s) return i;
    }
    return heap.segments.size();
  };
  auto walk = [&](SegmentId start) {
    std::vector<SegmentId> stack{start};
    while (!stack.empty()) {
      SegmentId s = stack.back();
      stack.pop_back();
      size_t i = index_of(s);
      if (i >= heap.segments.size() || reached[i]) continue;
      reached[i] = true;
      if (!mem.map().find(s)->live) continue;
      for (const auto& [at, p] : mem.data(s).pointers) stack.push_back(p.segment);
    }
  };
  for (size_t i = 0; i < heap.segments.size(); ++i) {
    if (reached[i]) continue;
    SnapshotRoot r;
    r.name = "arg" + std::to_string(heap.roots.size());
    r.arg_index = static_cast<int>(heap.roots.size());
    r.type = node_ptr;
    r.value = Value::of_pointer({heap.segments[i], 0});
    heap.roots.push_back(r);
    walk(heap.segments[i]);
  }
  if (rng.below(4) == 0) {
    SnapshotRoot r;
    r.name = "arg" + std::to_string(heap.roots.size());
    r.arg_index = static_cast<int>(heap.roots.size());
    r.type = MiniType::int_type();
    r.value = Value::of_int(static_cast<int64_t>(rng.next() >> 1));
    heap.roots.push_back(r);
  }
  return heap;
}

}  // namespace testkit
