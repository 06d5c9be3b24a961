#include "codec.hpp"
#include "unitcarve/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>

namespace unitcarve::codec {

namespace {

constexpr char kHex[] = "0123456789abcdef";

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(std::span<const uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

std::string to_hex(std::string_view bytes) {
  return to_hex(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()));
}

std::vector<uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2) throw DecodeError("odd-length hex string");
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = hex_digit(hex[2 * i]);
    int lo = hex_digit(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw DecodeError("invalid hex digit");
    out[i] = static_cast<uint8_t>(hi * 16 + lo);
  }
  return out;
}

std::string string_from_hex(std::string_view hex) {
  auto bytes = from_hex(hex);
  return std::string(bytes.begin(), bytes.end());
}

std::string double_bits(double d) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(std::bit_cast<uint64_t>(d)));
  return buf;
}

double double_from_bits(std::string_view hex) {
  uint64_t bits = 0;
  auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), bits, 16);
  if (ec != std::errc() || p != hex.data() + hex.size() || hex.size() != 16) {
    throw DecodeError("invalid double bit pattern '" + std::string(hex) + "'");
  }
  return std::bit_cast<double>(bits);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw DecodeError(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw DecodeError(std::string("missing field '") + key + "'");
  return *it;
}

std::string get_string(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw DecodeError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int64_t get_int(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) throw DecodeError(std::string("field '") + key + "' must be an integer");
  return v.get<int64_t>();
}

bool get_bool(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_boolean()) throw DecodeError(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DecodeError(e.what());
  }
}

json encode(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int:
      return {{"int", v.i}};
    case Value::Kind::Double:
      return {{"double", double_bits(v.d)}};
    case Value::Kind::Pointer:
      return {{"ptr", json::array({v.p.segment, v.p.offset})}};
  }
  return nullptr;
}

Value decode_value(const json& j) {
  if (j.contains("int")) return Value::of_int(get_int(j, "int"));
  if (j.contains("double")) return Value::of_double(double_from_bits(get_string(j, "double")));
  if (j.contains("ptr")) {
    const json& p = j.at("ptr");
    if (!p.is_array() || p.size() != 2) throw DecodeError("pointer must be [segment, offset]");
    return Value::of_pointer({p[0].get<SegmentId>(), p[1].get<int64_t>()});
  }
  throw DecodeError("unrecognized value");
}

json encode(const RootValue& v) {
  switch (v.kind) {
    case RootValue::Kind::Immediate:
      if (v.immediate.kind == Value::Kind::Double) {
        return {{"kind", "double"}, {"bits", double_bits(v.immediate.d)}};
      }
      return {{"kind", "int"}, {"value", v.immediate.i}};
    case RootValue::Kind::Null:
      return {{"kind", "null"}};
    case RootValue::Kind::Ref:
      return {{"kind", "ref"}, {"node", v.node}, {"offset", v.offset}};
    case RootValue::Kind::Storage:
      return {{"kind", "storage"}, {"node", v.node}};
    case RootValue::Kind::Truncated:
      return {{"kind", "truncated"}};
  }
  return nullptr;
}

RootValue decode_root_value(const json& j) {
  std::string kind = get_string(j, "kind");
  if (kind == "int") return RootValue::of_immediate(Value::of_int(get_int(j, "value")));
  if (kind == "double") return RootValue::of_immediate(Value::of_double(double_from_bits(get_string(j, "bits"))));
  if (kind == "null") return RootValue::null();
  if (kind == "ref") return RootValue::ref(static_cast<NodeId>(get_int(j, "node")), get_int(j, "offset"));
  if (kind == "storage") return RootValue::storage(static_cast<NodeId>(get_int(j, "node")));
  if (kind == "truncated") return RootValue::truncated();
  throw DecodeError("unknown root value kind '" + kind + "'");
}

json encode_type(const TypeRef& t) {
  if (!t) return nullptr;
  return type_name(*t);
}

TypeRef decode_type(const json& j) {
  if (j.is_null()) return nullptr;
  if (!j.is_string()) throw DecodeError("type must be a string");
  try {
    return parse_type_name(j.get<std::string>());
  } catch (const std::exception& e) {
    throw DecodeError(e.what());
  }
}

json encode(const MemoryGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json edges = json::array();
    for (const auto& e : n.edges) {
      json je = {{"at", e.at}, {"path", e.path}};
      if (e.target) {
        je["target"] = *e.target;
        je["offset"] = e.target_offset;
      } else {
        je["truncated"] = true;
      }
      edges.push_back(std::move(je));
    }
    json jn = {{"id", n.id},
               {"origin", std::string(origin_name(n.origin))},
               {"type", encode_type(n.type)},
               {"length", n.length},
               {"live", n.live},
               {"bytes", to_hex(n.bytes)},
               {"edges", std::move(edges)},
               {"path", n.path}};
    if (!n.global.empty()) jn["global"] = n.global;
    nodes.push_back(std::move(jn));
  }
  json roots = json::array();
  for (const auto& r : g.roots) {
    json jr = {{"name", r.name}, {"type", encode_type(r.type)}, {"value", encode(r.value)}};
    if (r.is_arg()) jr["arg"] = r.arg_index;
    roots.push_back(std::move(jr));
  }
  return {{"nodes", std::move(nodes)},
          {"roots", std::move(roots)},
          {"truncated", g.truncated},
          {"truncated_paths", g.truncated_paths}};
}

MemoryGraph decode_graph(const json& j) {
  MemoryGraph g;
  for (const auto& jn : field(j, "nodes")) {
    GraphNode n;
    n.id = static_cast<NodeId>(get_int(jn, "id"));
    if (n.id != g.nodes.size() + 1) throw DecodeError("node ids must be consecutive from 1");
    try {
      n.origin = origin_from_name(get_string(jn, "origin"));
    } catch (const std::exception& e) {
      throw DecodeError(e.what());
    }
    n.type = decode_type(field(jn, "type"));
    n.length = get_int(jn, "length");
    n.live = get_bool(jn, "live");
    n.bytes = from_hex(get_string(jn, "bytes"));
    n.path = get_string(jn, "path");
    if (jn.contains("global")) n.global = get_string(jn, "global");
    for (const auto& je : field(jn, "edges")) {
      GraphEdge e;
      e.at = get_int(je, "at");
      e.path = get_string(je, "path");
      if (je.contains("target")) {
        e.target = static_cast<NodeId>(get_int(je, "target"));
        e.target_offset = get_int(je, "offset");
      } else {
        e.truncated = true;
      }
      n.edges.push_back(std::move(e));
    }
    g.nodes.push_back(std::move(n));
  }
  for (const auto& n : g.nodes) {
    for (const auto& e : n.edges) {
      if (e.target && (*e.target == 0 || *e.target > g.nodes.size())) {
        throw DecodeError("edge to unknown node " + std::to_string(*e.target));
      }
    }
  }
  for (const auto& jr : field(j, "roots")) {
    GraphRoot r;
    r.name = get_string(jr, "name");
    r.type = decode_type(field(jr, "type"));
    if (!r.type) throw DecodeError("root '" + r.name + "' has no type");
    r.value = decode_root_value(field(jr, "value"));
    if (jr.contains("arg")) r.arg_index = static_cast<int>(get_int(jr, "arg"));
    g.roots.push_back(std::move(r));
  }
  g.truncated = get_bool(j, "truncated");
  for (const auto& p : field(j, "truncated_paths")) g.truncated_paths.push_back(p.get<std::string>());
  return g;
}

json encode(const SetupPlan& p) {
  json steps = json::array();
  for (const auto& step : p.steps) {
    if (const auto* a = std::get_if<PlanAllocate>(&step)) {
      json js = {{"op", "allocate"},
                 {"node", a->node},
                 {"length", a->length},
                 {"origin", std::string(origin_name(a->origin))},
                 {"live", a->live},
                 {"hint", encode_type(a->hint)}};
      if (!a->global.empty()) js["global"] = a->global;
      steps.push_back(std::move(js));
    } else if (const auto* w = std::get_if<PlanWriteBytes>(&step)) {
      steps.push_back({{"op", "write-bytes"}, {"node", w->node}, {"offset", w->offset}, {"bytes", to_hex(w->bytes)}});
    } else if (const auto* wp = std::get_if<PlanWritePointer>(&step)) {
      steps.push_back({{"op", "write-pointer"},
                       {"node", wp->node},
                       {"offset", wp->offset},
                       {"target", wp->target},
                       {"target_offset", wp->target_offset}});
    } else if (const auto* g = std::get_if<PlanSetGlobal>(&step)) {
      steps.push_back({{"op", "set-global"}, {"name", g->name}, {"type", encode_type(g->type)}, {"value", encode(g->value)}});
    } else if (const auto* b = std::get_if<PlanBindArg>(&step)) {
      steps.push_back(
          {{"op", "bind-arg"}, {"position", b->position}, {"type", encode_type(b->type)}, {"value", encode(b->value)}});
    }
  }
  return {{"steps", std::move(steps)}, {"truncated", p.truncated}, {"truncated_paths", p.truncated_paths}};
}

SetupPlan decode_plan(const json& j) {
  SetupPlan p;
  for (const auto& js : field(j, "steps")) {
    std::string op = get_string(js, "op");
    if (op == "allocate") {
      PlanAllocate a;
      a.node = static_cast<NodeId>(get_int(js, "node"));
      a.length = get_int(js, "length");
      try {
        a.origin = origin_from_name(get_string(js, "origin"));
      } catch (const std::exception& e) {
        throw DecodeError(e.what());
      }
      a.live = get_bool(js, "live");
      a.hint = decode_type(field(js, "hint"));
      if (js.contains("global")) a.global = get_string(js, "global");
      p.steps.emplace_back(std::move(a));
    } else if (op == "write-bytes") {
      p.steps.emplace_back(PlanWriteBytes{static_cast<NodeId>(get_int(js, "node")), get_int(js, "offset"),
                                          from_hex(get_string(js, "bytes"))});
    } else if (op == "write-pointer") {
      p.steps.emplace_back(PlanWritePointer{static_cast<NodeId>(get_int(js, "node")), get_int(js, "offset"),
                                            static_cast<NodeId>(get_int(js, "target")), get_int(js, "target_offset")});
    } else if (op == "set-global") {
      p.steps.emplace_back(
          PlanSetGlobal{get_string(js, "name"), decode_type(field(js, "type")), decode_root_value(field(js, "value"))});
    } else if (op == "bind-arg") {
      p.steps.emplace_back(PlanBindArg{static_cast<int>(get_int(js, "position")), decode_type(field(js, "type")),
                                       decode_root_value(field(js, "value"))});
    } else {
      throw DecodeError("unknown plan step '" + op + "'");
    }
  }
  p.truncated = get_bool(j, "truncated");
  for (const auto& s : field(j, "truncated_paths")) p.truncated_paths.push_back(s.get<std::string>());
  return p;
}

json encode(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Ok:
      return {{"kind", "ok"}, {"exit", o.exit_value}};
    case Outcome::Kind::Trap:
      return {{"kind", "trap"},
              {"trap", std::string(trap_name(o.trap))},
              {"detail", o.detail},
              {"function", o.function},
              {"line", o.line}};
    case Outcome::Kind::StepLimit:
      return {{"kind", "step-limit-exceeded"}};
    case Outcome::Kind::SetupError:
      return {{"kind", "setup-error"}, {"detail", o.detail}};
  }
  return nullptr;
}

Outcome decode_outcome(const json& j) {
  std::string kind = get_string(j, "kind");
  if (kind == "ok") return Outcome::ok(get_int(j, "exit"));
  if (kind == "trap") {
    auto t = trap_from_name(get_string(j, "trap"));
    if (!t) throw DecodeError("unknown trap kind");
    return Outcome::trapped(*t, get_string(j, "detail"), get_string(j, "function"), static_cast<int>(get_int(j, "line")));
  }
  if (kind == "step-limit-exceeded") return Outcome::step_limit();
  if (kind == "setup-error") return Outcome::setup_error(get_string(j, "detail"));
  throw DecodeError("unknown outcome kind '" + kind + "'");
}

json encode(const SystemInput& in) {
  json sources = json::array();
  for (const auto& s : in.sources) sources.push_back({{"name", s.name}, {"hex", to_hex(s.content)}});
  return {{"sources", std::move(sources)}};
}

SystemInput decode_input(const json& j) {
  SystemInput in;
  for (const auto& s : field(j, "sources")) {
    std::string name = get_string(s, "name");
    if (in.find(name)) throw DecodeError("duplicate input source '" + name + "'");
    in.set(std::move(name), string_from_hex(get_string(s, "hex")));
  }
  return in;
}

BranchId decode_branch(std::string_view text) {
  auto hash = text.rfind('#');
  auto colon = text.rfind(':');
  if (hash == std::string_view::npos || colon == std::string_view::npos || colon < hash) {
    throw DecodeError("malformed branch id '" + std::string(text) + "'");
  }
  BranchId b;
  b.function = std::string(text.substr(0, hash));
  auto num = text.substr(hash + 1, colon - hash - 1);
  auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), b.cond);
  if (ec != std::errc() || p != num.data() + num.size()) {
    throw DecodeError("malformed branch id '" + std::string(text) + "'");
  }
  try {
    b.arm = arm_from_name(text.substr(colon + 1));
  } catch (const std::exception& e) {
    throw DecodeError(e.what());
  }
  return b;
}

json encode(const BranchSet& s) {
  json out = json::array();
  for (const auto& b : s) out.push_back(to_string(b));
  return out;
}

BranchSet decode_branches(const json& j) {
  if (!j.is_array()) throw DecodeError("branch set must be an array");
  BranchSet out;
  for (const auto& b : j) out.insert(decode_branch(b.get<std::string>()));
  return out;
}

json encode(const CoverageMap& c) {
  json out = json::object();
  for (const auto& [id, n] : c.counts()) out[to_string(id)] = n;
  return out;
}

CoverageMap decode_coverage(const json& j) {
  if (!j.is_object()) throw DecodeError("coverage must be an object");
  CoverageMap c;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number_unsigned() && !v.is_number_integer()) throw DecodeError("coverage count must be an integer");
    if (v.get<int64_t>() < 0) throw DecodeError("coverage counts are non-negative");
    c.hit(decode_branch(k), v.get<uint64_t>());
  }
  return c;
}

}  // namespace unitcarve::codec

namespace unitcarve {

std::string coverage_to_json(const CoverageMap& coverage) { return codec::encode(coverage).dump(2) + "\n"; }

CoverageMap coverage_from_json(std::string_view text) { return codec::decode_coverage(codec::parse(text)); }

std::string input_to_json(const SystemInput& input) { return codec::encode(input).dump(2) + "\n"; }

SystemInput input_from_json(std::string_view text) { return codec::decode_input(codec::parse(text)); }

}  // namespace unitcarve
