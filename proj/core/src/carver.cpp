#include "unitcarve/carver.hpp"

#include <deque>
#include <stdexcept>

#include "codec.hpp"

namespace unitcarve {

using codec::json;

std::string_view variant_name(StringVariant v) {
  switch (v) {
    case StringVariant::Single:
      return "single";
    case StringVariant::Full:
      return "full";
    case StringVariant::Terminated:
      return "terminated";
  }
  return "?";
}

StringVariant variant_from_name(std::string_view name) {
  if (name == "single") return StringVariant::Single;
  if (name == "full") return StringVariant::Full;
  if (name == "terminated") return StringVariant::Terminated;
  throw std::invalid_argument("unknown string variant '" + std::string(name) + "'");
}

std::set<std::string> reachable_functions(const Program& program, std::string_view f, const MemoryGraph*) {
  std::set<std::string> out;
  int start = program.function_index(f);
  if (start < 0) return out;
  std::vector<int> work{start};
  std::vector<bool> seen(program.functions.size(), false);
  seen[start] = true;
  while (!work.empty()) {
    int fi = work.back();
    work.pop_back();
    out.insert(program.functions[fi].name);
    for (int callee : program.functions[fi].callees) {
      if (!seen[callee]) {
        seen[callee] = true;
        work.push_back(callee);
      }
    }
  }
  return out;
}

std::set<std::string> reachable_globals(const Program& program, std::string_view f, const MemoryGraph* context) {
  std::set<std::string> out;
  for (const auto& name : reachable_functions(program, f, context)) {
    for (int g : program.function(name).globals_used) out.insert(program.globals[g].name);
  }
  return out;
}

MemoryGraph terminated_variant(const MemoryGraph& graph, bool* changed) {
  MemoryGraph out = graph;
  std::vector<int64_t> max_offset(graph.nodes.size() + 1, 0);
  auto note = [&](NodeId n, int64_t off) { max_offset[n] = std::max(max_offset[n], off); };
  for (const auto& n : graph.nodes) {
    for (const auto& e : n.edges) {
      if (e.target) note(*e.target, e.target_offset);
    }
  }
  for (const auto& r : graph.roots) {
    if (r.value.kind == RootValue::Kind::Ref) note(r.value.node, r.value.offset);
    if (r.value.kind == RootValue::Kind::Storage) note(r.value.node, INT64_MAX);
  }
  bool any = false;
  for (auto& n : out.nodes) {
    if (!n.live || !n.edges.empty() || n.origin == Origin::Global) continue;
    if (!n.type || n.type->kind != MiniType::Kind::Char) continue;
    TrimResult t = trim_trailing_garbage(n.bytes);
    if (!t.alt || t.alt->size() == t.primary.size()) continue;
    auto len = static_cast<int64_t>(t.alt->size());
    if (max_offset[n.id] > len) continue;
    n.bytes = std::move(*t.alt);
    n.length = len;
    any = true;
  }
  if (changed) *changed = any;
  return out;
}

RunResult replay(const Program& program, const UnitTest& test, const Limits& limits) {
  return run_unit(program, test.callee, test.plan, test.input, limits);
}

namespace {

std::vector<std::string> keep_roots(const Program& program, const CallEvent& ev, std::vector<std::string>& globals) {
  std::set<std::string> reach = reachable_globals(program, ev.callee);
  std::vector<std::string> keep;
  for (const auto& r : ev.graph.roots) {
    if (r.is_arg()) {
      keep.push_back(r.name);
    } else if (reach.count(r.name)) {
      keep.push_back(r.name);
      globals.push_back(r.name);
    }
  }
  return keep;
}

bool footprint_matches(const Program& program, const UnitTest& t, const Limits& limits) {
  RunResult r = replay(program, t, limits);
  return r.coverage.branches_of(t.callee) == t.footprint;
}

}  // namespace

std::vector<UnitTest> carve(const Trace& trace, const Program& program, const CarveOptions& options) {
  std::vector<UnitTest> out;
  SystemInput input = trace.end ? trace.end->input : SystemInput{};
  for (const auto& ev : trace.calls) {
    if (options.filter && !options.filter->count(ev.callee)) continue;
    if (program.function_index(ev.callee) < 0) {
      throw std::invalid_argument("trace calls unknown function '" + ev.callee + "'");
    }
    UnitTest t;
    t.trace_id = options.trace_id.empty() ? ev.input_ref : options.trace_id;
    t.id = t.trace_id + ":" + ev.callee + "@" + std::to_string(ev.seq);
    t.program = options.program_path;
    t.callee = ev.callee;
    t.seq = ev.seq;
    t.input = input;
    t.completed = ev.completed;
    t.footprint = ev.footprint;
    t.graph = restrict_roots(ev.graph, keep_roots(program, ev, t.reachable_globals));
    for (const auto& r : t.graph.roots) {
      if (!r.is_arg()) continue;
      if (t.recorded_args.size() <= static_cast<size_t>(r.arg_index)) t.recorded_args.resize(r.arg_index + 1);
      t.recorded_args[r.arg_index] = r.value;
    }
    t.setup_error = t.graph.truncated;
    t.plan = plan_reconstruction(t.graph);
    if (!t.setup_error) {
      bool changed = false;
      MemoryGraph term = terminated_variant(t.graph, &changed);
      if (changed) {
        UnitTest alt = t;
        alt.graph = std::move(term);
        alt.plan = plan_reconstruction(alt.graph);
        alt.string_variant = StringVariant::Terminated;
        if (footprint_matches(program, alt, options.replay_limits)) {
          t = std::move(alt);
        } else {
          t.string_variant = StringVariant::Full;
        }
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

namespace codec {

json encode(const UnitTest& t) {
  json args = json::array();
  for (const auto& a : t.recorded_args) args.push_back(encode(a));
  return {{"id", t.id},
          {"program", t.program},
          {"callee", t.callee},
          {"trace", t.trace_id},
          {"seq", t.seq},
          {"input", encode(t.input)},
          {"string_variant", std::string(variant_name(t.string_variant))},
          {"setup_error", t.setup_error},
          {"completed", t.completed},
          {"footprint", encode(t.footprint)},
          {"reachable_globals", t.reachable_globals},
          {"recorded_args", std::move(args)},
          {"graph", encode(t.graph)},
          {"plan", encode(t.plan)}};
}

UnitTest decode_unit(const json& j) {
  UnitTest t;
  t.id = get_string(j, "id");
  t.program = get_string(j, "program");
  t.callee = get_string(j, "callee");
  t.trace_id = get_string(j, "trace");
  t.seq = get_int(j, "seq");
  t.input = decode_input(field(j, "input"));
  try {
    t.string_variant = variant_from_name(get_string(j, "string_variant"));
  } catch (const std::invalid_argument& e) {
    throw DecodeError(e.what());
  }
  t.setup_error = get_bool(j, "setup_error");
  t.completed = get_bool(j, "completed");
  t.footprint = decode_branches(field(j, "footprint"));
  for (const auto& g : field(j, "reachable_globals")) t.reachable_globals.push_back(g.get<std::string>());
  for (const auto& a : field(j, "recorded_args")) t.recorded_args.push_back(decode_root_value(a));
  t.graph = decode_graph(field(j, "graph"));
  t.plan = decode_plan(field(j, "plan"));
  return t;
}

}  // namespace codec

std::string serialize_units(const std::vector<UnitTest>& tests) {
  std::string out;
  for (const auto& t : tests) {
    out += codec::encode(t).dump();
    out += '\n';
  }
  return out;
}

std::vector<UnitTest> deserialize_units(std::string_view text) {
  std::vector<UnitTest> out;
  codec::for_each_line(text, [&](const json& j) { out.push_back(codec::decode_unit(j)); });
  return out;
}

}  // namespace unitcarve
