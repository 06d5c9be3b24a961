#include "unitcarve/trace.hpp"

#include <deque>
#include <unordered_map>

#include "codec.hpp"

namespace unitcarve {

using codec::json;

const CallEvent* Trace::find_call(int64_t seq) const {
  for (const auto& c : calls) {
    if (c.seq == seq) return &c;
  }
  return nullptr;
}

std::vector<const CallEvent*> Trace::calls_to(std::string_view callee) const {
  std::vector<const CallEvent*> out;
  for (const auto& c : calls) {
    if (c.callee == callee) out.push_back(&c);
  }
  return out;
}

std::string serialize_trace(const Trace& trace) {
  std::string out;
  auto line = [&](const json& j) {
    out += j.dump();
    out += '\n';
  };
  size_t ci = 0;
  size_t gi = 0;
  while (ci < trace.calls.size() || gi < trace.globals.size()) {
    bool take_call = gi >= trace.globals.size() ||
                     (ci < trace.calls.size() && trace.calls[ci].seq < trace.globals[gi].seq);
    if (take_call) {
      const CallEvent& c = trace.calls[ci++];
      line({{"kind", "call"},
            {"seq", c.seq},
            {"callee", c.callee},
            {"input_ref", c.input_ref},
            {"completed", c.completed},
            {"footprint", codec::encode(c.footprint)},
            {"graph", codec::encode(c.graph)}});
    } else {
      const GlobalUpdate& g = trace.globals[gi++];
      line({{"kind", "global"}, {"seq", g.seq}, {"name", g.name}, {"graph", codec::encode(g.graph)}});
    }
  }
  if (trace.end) {
    line({{"kind", "end"},
          {"outcome", codec::encode(trace.end->outcome)},
          {"input", codec::encode(trace.end->input)},
          {"output", codec::to_hex(trace.end->output)}});
  }
  return out;
}

Trace deserialize_trace(std::string_view text) {
  Trace trace;
  int64_t last_seq = 0;
  codec::for_each_line(text, [&](const json& j) {
    if (trace.end) throw codec::DecodeError("record after the end record");
    std::string kind = codec::get_string(j, "kind");
    if (kind == "call" || kind == "global") {
      int64_t seq = codec::get_int(j, "seq");
      if (seq <= last_seq) throw codec::DecodeError("seq must be strictly increasing");
      last_seq = seq;
      if (kind == "call") {
        CallEvent c;
        c.seq = seq;
        c.callee = codec::get_string(j, "callee");
        c.input_ref = codec::get_string(j, "input_ref");
        c.completed = codec::get_bool(j, "completed");
        c.footprint = codec::decode_branches(codec::field(j, "footprint"));
        c.graph = codec::decode_graph(codec::field(j, "graph"));
        trace.calls.push_back(std::move(c));
      } else {
        GlobalUpdate g;
        g.seq = seq;
        g.name = codec::get_string(j, "name");
        g.graph = codec::decode_graph(codec::field(j, "graph"));
        trace.globals.push_back(std::move(g));
      }
    } else if (kind == "end") {
      TraceEnd end;
      end.outcome = codec::decode_outcome(codec::field(j, "outcome"));
      end.input = codec::decode_input(codec::field(j, "input"));
      end.output = codec::string_from_hex(codec::get_string(j, "output"));
      trace.end = std::move(end);
    } else {
      throw codec::DecodeError("unknown record kind '" + kind + "'");
    }
  });
  return trace;
}

std::map<std::string, MemoryGraph> fold_globals(const std::map<std::string, MemoryGraph>& initial,
                                                const std::vector<GlobalUpdate>& updates, int64_t at_seq) {
  std::map<std::string, MemoryGraph> out = initial;
  for (const auto& up : updates) {
    if (up.seq >= at_seq) break;
    out[up.name] = up.graph;
  }
  return out;
}

MemoryGraph restrict_roots(const MemoryGraph& graph, const std::vector<std::string>& keep) {
  MemoryGraph out;
  std::unordered_map<NodeId, NodeId> renumber;
  std::deque<NodeId> queue;
  auto visit = [&](NodeId old) {
    auto it = renumber.find(old);
    if (it != renumber.end()) return it->second;
    NodeId id = static_cast<NodeId>(renumber.size() + 1);
    renumber.emplace(old, id);
    queue.push_back(old);
    return id;
  };
  for (const auto& name : keep) {
    const GraphRoot* r = graph.find_root(name);
    if (!r) continue;
    GraphRoot copy = *r;
    if (copy.value.kind == RootValue::Kind::Ref || copy.value.kind == RootValue::Kind::Storage) {
      copy.value.node = visit(copy.value.node);
    } else if (copy.value.kind == RootValue::Kind::Truncated) {
      out.truncated = true;
      out.truncated_paths.push_back(copy.name);
    }
    out.roots.push_back(std::move(copy));
  }
  std::vector<GraphNode> nodes;
  while (!queue.empty()) {
    NodeId old = queue.front();
    queue.pop_front();
    GraphNode n = graph.node(old);
    n.id = renumber.at(old);
    for (auto& e : n.edges) {
      if (e.target) {
        e.target = visit(*e.target);
      } else {
        out.truncated = true;
        out.truncated_paths.push_back(e.path);
      }
    }
    nodes.push_back(std::move(n));
  }
  out.nodes = std::move(nodes);
  return out;
}

std::map<std::string, MemoryGraph> split_globals(const MemoryGraph& graph) {
  std::map<std::string, MemoryGraph> out;
  for (const auto& r : graph.roots) {
    if (!r.is_arg()) out.emplace(r.name, restrict_roots(graph, {r.name}));
  }
  return out;
}

}  // namespace unitcarve
