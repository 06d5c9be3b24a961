#include "unitcarve/parameterizer.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <deque>
#include <stdexcept>

#include "codec.hpp"

namespace unitcarve {

using codec::json;

std::string_view param_kind_name(ParamKind k) {
  switch (k) {
    case ParamKind::String:
      return "string";
    case ParamKind::Int:
      return "int";
    case ParamKind::Float:
      return "float";
  }
  return "?";
}

ParamKind param_kind_from_name(std::string_view name) {
  if (name == "string") return ParamKind::String;
  if (name == "int") return ParamKind::Int;
  if (name == "float") return ParamKind::Float;
  throw std::invalid_argument("unknown parameter kind '" + std::string(name) + "'");
}

bool same_value(const ParamValue& a, const ParamValue& b) {
  if (a.index() != b.index()) return false;
  if (const auto* d = std::get_if<double>(&a)) {
    return std::bit_cast<uint64_t>(*d) == std::bit_cast<uint64_t>(std::get<double>(b));
  }
  return a == b;
}

std::string numeric_repr(int64_t v) { return std::to_string(v); }

std::string numeric_repr(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string render(const ParamValue& v) {
  if (const auto* i = std::get_if<int64_t>(&v)) return numeric_repr(*i);
  if (const auto* d = std::get_if<double>(&v)) return numeric_repr(*d);
  return std::get<std::string>(v);
}

std::string describe(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    std::string out = "\"";
    for (unsigned char c : *s) {
      if (c >= 0x20 && c < 0x7f && c != '"' && c != '\\') {
        out.push_back(static_cast<char>(c));
      } else {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\x%02x", c);
        out += buf;
      }
    }
    return out + "\"";
  }
  return render(v);
}

std::vector<std::string> match_texts(const ParamValue& v) {
  std::vector<std::string> out{render(v)};
  if (const auto* d = std::get_if<double>(&v)) {
    if (std::isfinite(*d) && std::trunc(*d) == *d && std::fabs(*d) < 9.0e18) {
      std::string whole = numeric_repr(static_cast<int64_t>(*d));
      if (whole != out.front()) out.push_back(whole);
    }
  }
  return out;
}

std::optional<InputSpan> match_text(std::string_view text, const SystemInput& input) {
  if (text.empty()) return std::nullopt;
  for (const auto& src : input.sources) {
    auto at = src.content.find(text);
    if (at != std::string::npos) {
      return InputSpan{src.name, static_cast<int64_t>(at), static_cast<int64_t>(at + text.size())};
    }
  }
  return std::nullopt;
}

std::optional<InputSpan> match_value(const ParamValue& v, const SystemInput& input) {
  for (const auto& text : match_texts(v)) {
    if (auto span = match_text(text, input)) return span;
  }
  return std::nullopt;
}

namespace {

bool is_string_node(const GraphNode& n) {
  return n.live && n.edges.empty() && n.type && n.type->kind == MiniType::Kind::Char;
}

std::string string_content(const GraphNode& n) {
  const auto* nul = std::memchr(n.bytes.data(), 0, n.bytes.size());
  size_t len = nul ? static_cast<size_t>(static_cast<const uint8_t*>(nul) - n.bytes.data()) : n.bytes.size();
  return std::string(n.bytes.begin(), n.bytes.begin() + static_cast<ptrdiff_t>(len));
}

class Walker {
 public:
  Walker(const Program& program, const UnitTest& test, const SystemInput& input)
      : records_(program.records), graph_(test.graph), input_(input), visited_(test.graph.nodes.size() + 1, false) {
    out_.base = test;
  }

  ParameterizedUnitTest run() {
    for (const auto& root : graph_.roots) {
      switch (root.value.kind) {
        case RootValue::Kind::Immediate: {
          ParamLocation loc;
          if (root.is_arg()) {
            loc.kind = ParamLocation::Kind::Arg;
            loc.arg_index = root.arg_index;
          } else {
            loc.kind = ParamLocation::Kind::Global;
            loc.global = root.name;
          }
          const Value& v = root.value.immediate;
          if (root.type->kind == MiniType::Kind::Int) consider(loc, root.name, ParamKind::Int, v.i);
          if (root.type->kind == MiniType::Kind::Double) consider(loc, root.name, ParamKind::Float, v.d);
          break;
        }
        case RootValue::Kind::Ref:
        case RootValue::Kind::Storage:
          reach(root.value.node);
          break;
        default:
          break;
      }
    }
    while (!queue_.empty()) {
      NodeId id = queue_.front();
      queue_.pop_front();
      walk_node(graph_.node(id));
    }
    return std::move(out_);
  }

 private:
  void consider(const ParamLocation& loc, const std::string& path, ParamKind kind, ParamValue value) {
    std::optional<InputSpan> span;
    std::string text;
    for (const auto& t : match_texts(value)) {
      span = match_text(t, input_);
      if (span) {
        text = t;
        break;
      }
    }
    if (!span) return;
    for (const auto& p : out_.parameters) {
      if (p.span.overlaps(*span)) return;
    }
    Parameter p;
    p.slot = static_cast<int>(out_.parameters.size());
    p.location = loc;
    p.path = path;
    p.kind = kind;
    p.original = std::move(value);
    p.text = std::move(text);
    p.span = std::move(*span);
    out_.parameters.push_back(std::move(p));
  }

  void reach(NodeId id) {
    if (visited_[id]) return;
    visited_[id] = true;
    const GraphNode& n = graph_.node(id);
    if (is_string_node(n)) {
      std::string s = string_content(n);
      if (s.empty()) return;
      ParamLocation loc;
      loc.kind = ParamLocation::Kind::NodeString;
      loc.node = id;
      consider(loc, n.path, ParamKind::String, std::move(s));
      return;
    }
    queue_.push_back(id);
  }

  void walk_node(const GraphNode& n) {
    if (!n.live || !n.type || n.type->kind == MiniType::Kind::Void) return;
    int64_t size = records_.size_of(*n.type);
    if (size <= 0) return;
    for (int64_t base = 0; base + size <= n.length; base += size) {
      std::string path = n.length == size ? n.path : n.path + "[" + std::to_string(base / size) + "]";
      walk_type(n, n.type, base, path);
    }
  }

  void walk_type(const GraphNode& n, const TypeRef& t, int64_t off, const std::string& path) {
    switch (t->kind) {
      case MiniType::Kind::Int:
      case MiniType::Kind::Double: {
        if (off + 8 > static_cast<int64_t>(n.bytes.size())) return;
        ParamLocation loc;
        loc.kind = ParamLocation::Kind::NodeField;
        loc.node = n.id;
        loc.offset = off;
        if (t->kind == MiniType::Kind::Int) {
          int64_t v;
          std::memcpy(&v, n.bytes.data() + off, 8);
          consider(loc, path, ParamKind::Int, v);
        } else {
          double v;
          std::memcpy(&v, n.bytes.data() + off, 8);
          consider(loc, path, ParamKind::Float, v);
        }
        return;
      }
      case MiniType::Kind::Pointer:
        for (const auto& e : n.edges) {
          if (e.at == off && e.target) reach(*e.target);
        }
        return;
      case MiniType::Kind::Array: {
        int64_t esz = records_.size_of(*t->elem);
        for (int64_t i = 0; i < t->length; ++i) {
          walk_type(n, t->elem, off + i * esz, path + "[" + std::to_string(i) + "]");
        }
        return;
      }
      case MiniType::Kind::Record: {
        const RecordDef* rec = records_.find(t->record);
        if (!rec) return;
        for (const auto& f : rec->fields) walk_type(n, f.type, off + f.offset, path + "." + f.name);
        return;
      }
      default:
        return;
    }
  }

  const RecordTable& records_;
  const MemoryGraph& graph_;
  const SystemInput& input_;
  std::vector<bool> visited_;
  std::deque<NodeId> queue_;
  ParameterizedUnitTest out_;
};

}  // namespace

ParameterizedUnitTest parameterize(const Program& program, const UnitTest& test, const SystemInput& input) {
  return Walker(program, test, input).run();
}

ParamBinding original_binding(const ParameterizedUnitTest& test) {
  ParamBinding b;
  b.mutator = "original";
  for (const auto& p : test.parameters) b.values.push_back(p.original);
  return b;
}

namespace {

Value immediate_of(const ParamValue& v) {
  if (const auto* i = std::get_if<int64_t>(&v)) return Value::of_int(*i);
  if (const auto* d = std::get_if<double>(&v)) return Value::of_double(*d);
  throw std::invalid_argument("string bound to a scalar slot");
}

void write_scalar(std::vector<uint8_t>& bytes, int64_t off, const ParamValue& v) {
  if (off < 0 || off + 8 > static_cast<int64_t>(bytes.size())) return;
  if (const auto* i = std::get_if<int64_t>(&v)) std::memcpy(bytes.data() + off, i, 8);
  if (const auto* d = std::get_if<double>(&v)) std::memcpy(bytes.data() + off, d, 8);
}

}  // namespace

SetupPlan apply_binding(const ParameterizedUnitTest& test, const ParamBinding& binding) {
  if (binding.values.size() != test.parameters.size()) {
    throw std::invalid_argument("binding has " + std::to_string(binding.values.size()) + " values for " +
                                std::to_string(test.parameters.size()) + " parameters");
  }
  SetupPlan plan = test.base.plan;
  std::vector<PlanAllocate*> alloc(test.base.graph.nodes.size() + 1, nullptr);
  std::vector<PlanWriteBytes*> bytes(test.base.graph.nodes.size() + 1, nullptr);
  for (auto& step : plan.steps) {
    if (auto* a = std::get_if<PlanAllocate>(&step); a && a->node < alloc.size()) alloc[a->node] = a;
    if (auto* w = std::get_if<PlanWriteBytes>(&step); w && w->node < bytes.size() && w->offset == 0) bytes[w->node] = w;
  }
  for (size_t i = 0; i < test.parameters.size(); ++i) {
    const Parameter& p = test.parameters[i];
    const ParamValue& v = binding.values[i];
    if (same_value(v, p.original)) continue;
    if (v.index() != p.original.index()) throw std::invalid_argument("binding for slot " + std::to_string(i) + " has the wrong kind");
    switch (p.location.kind) {
      case ParamLocation::Kind::Arg:
        for (auto& step : plan.steps) {
          if (auto* b = std::get_if<PlanBindArg>(&step); b && b->position == p.location.arg_index) {
            b->value = RootValue::of_immediate(immediate_of(v));
          }
        }
        break;
      case ParamLocation::Kind::Global:
        for (auto& step : plan.steps) {
          if (auto* g = std::get_if<PlanSetGlobal>(&step); g && g->name == p.location.global) {
            g->value = RootValue::of_immediate(immediate_of(v));
          }
        }
        break;
      case ParamLocation::Kind::NodeField:
        if (p.location.node < bytes.size() && bytes[p.location.node]) {
          write_scalar(bytes[p.location.node]->bytes, p.location.offset, v);
        }
        break;
      case ParamLocation::Kind::NodeString: {
        NodeId node = p.location.node;
        if (node >= alloc.size() || !alloc[node] || !bytes[node]) break;
        const std::string& now = std::get<std::string>(v);
        auto old_len = static_cast<int64_t>(std::get<std::string>(p.original).size());
        std::vector<uint8_t>& buf = bytes[node]->bytes;
        if (alloc[node]->origin == Origin::Global) {
          // Global storage has a fixed size.
          size_t n = std::min(now.size(), buf.size());
          std::memcpy(buf.data(), now.data(), n);
          if (n < buf.size()) buf[n] = 0;
          break;
        }
        std::vector<uint8_t> next(now.begin(), now.end());
        next.insert(next.end(), buf.begin() + std::min<int64_t>(old_len, static_cast<int64_t>(buf.size())), buf.end());
        int64_t delta = static_cast<int64_t>(now.size()) - old_len;
        buf = std::move(next);
        alloc[node]->length = static_cast<int64_t>(buf.size());
        for (auto& step : plan.steps) {
          if (auto* wp = std::get_if<PlanWritePointer>(&step); wp && wp->target == node && wp->target_offset >= old_len) {
            wp->target_offset += delta;
          }
          RootValue* rv = nullptr;
          if (auto* b = std::get_if<PlanBindArg>(&step)) rv = &b->value;
          if (auto* g = std::get_if<PlanSetGlobal>(&step)) rv = &g->value;
          if (rv && rv->kind == RootValue::Kind::Ref && rv->node == node && rv->offset >= old_len) rv->offset += delta;
        }
        break;
      }
    }
  }
  return plan;
}

RunResult run_unit(const Program& program, const ParameterizedUnitTest& test, const ParamBinding& binding,
                   const Limits& limits, const RunOptions& options) {
  SetupPlan plan = apply_binding(test, binding);
  return run_unit(program, test.base.callee, plan, test.base.input, limits, options);
}

namespace codec {

json encode(const ParamValue& v) {
  if (const auto* i = std::get_if<int64_t>(&v)) return {{"int", *i}};
  if (const auto* d = std::get_if<double>(&v)) return {{"double", double_bits(*d)}};
  return {{"hex", to_hex(std::get<std::string>(v))}};
}

ParamValue decode_param_value(const json& j) {
  if (j.contains("int")) return get_int(j, "int");
  if (j.contains("double")) return double_from_bits(get_string(j, "double"));
  if (j.contains("hex")) return string_from_hex(get_string(j, "hex"));
  throw DecodeError("unrecognized parameter value");
}

json encode(const Parameter& p) {
  json loc;
  switch (p.location.kind) {
    case ParamLocation::Kind::Arg:
      loc = {{"kind", "arg"}, {"index", p.location.arg_index}};
      break;
    case ParamLocation::Kind::Global:
      loc = {{"kind", "global"}, {"name", p.location.global}};
      break;
    case ParamLocation::Kind::NodeField:
      loc = {{"kind", "field"}, {"node", p.location.node}, {"offset", p.location.offset}};
      break;
    case ParamLocation::Kind::NodeString:
      loc = {{"kind", "string"}, {"node", p.location.node}};
      break;
  }
  return {{"slot", p.slot},
          {"location", std::move(loc)},
          {"path", p.path},
          {"kind", std::string(param_kind_name(p.kind))},
          {"original", encode(p.original)},
          {"text_hex", to_hex(p.text)},
          {"span", {{"source", p.span.source}, {"start", p.span.start}, {"end", p.span.end}}}};
}

Parameter decode_parameter(const json& j) {
  Parameter p;
  p.slot = static_cast<int>(get_int(j, "slot"));
  const json& loc = field(j, "location");
  std::string kind = get_string(loc, "kind");
  if (kind == "arg") {
    p.location.kind = ParamLocation::Kind::Arg;
    p.location.arg_index = static_cast<int>(get_int(loc, "index"));
  } else if (kind == "global") {
    p.location.kind = ParamLocation::Kind::Global;
    p.location.global = get_string(loc, "name");
  } else if (kind == "field") {
    p.location.kind = ParamLocation::Kind::NodeField;
    p.location.node = static_cast<NodeId>(get_int(loc, "node"));
    p.location.offset = get_int(loc, "offset");
  } else if (kind == "string") {
    p.location.kind = ParamLocation::Kind::NodeString;
    p.location.node = static_cast<NodeId>(get_int(loc, "node"));
  } else {
    throw DecodeError("unknown parameter location '" + kind + "'");
  }
  p.path = get_string(j, "path");
  try {
    p.kind = param_kind_from_name(get_string(j, "kind"));
  } catch (const std::invalid_argument& e) {
    throw DecodeError(e.what());
  }
  p.original = decode_param_value(field(j, "original"));
  p.text = string_from_hex(get_string(j, "text_hex"));
  const json& span = field(j, "span");
  p.span = {get_string(span, "source"), get_int(span, "start"), get_int(span, "end")};
  if (p.span.start < 0 || p.span.end <= p.span.start) throw DecodeError("empty or negative input span");
  return p;
}

json encode(const ParameterizedUnitTest& t) {
  json params = json::array();
  for (const auto& p : t.parameters) params.push_back(encode(p));
  return {{"unit", encode(t.base)}, {"parameters", std::move(params)}};
}

ParameterizedUnitTest decode_put(const json& j) {
  ParameterizedUnitTest t;
  t.base = decode_unit(field(j, "unit"));
  for (const auto& p : field(j, "parameters")) t.parameters.push_back(decode_parameter(p));
  return t;
}

json encode(const ParamBinding& b) {
  json values = json::array();
  for (const auto& v : b.values) values.push_back(encode(v));
  return {{"values", std::move(values)}, {"mutator", b.mutator}, {"seed", b.seed}};
}

ParamBinding decode_binding(const json& j) {
  ParamBinding b;
  for (const auto& v : field(j, "values")) b.values.push_back(decode_param_value(v));
  b.mutator = get_string(j, "mutator");
  const json& seed = field(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) throw DecodeError("seed must be an integer");
  b.seed = seed.get<uint64_t>();
  return b;
}

}  // namespace codec

std::string serialize_puts(const std::vector<ParameterizedUnitTest>& tests) {
  std::string out;
  for (const auto& t : tests) {
    out += codec::encode(t).dump();
    out += '\n';
  }
  return out;
}

std::vector<ParameterizedUnitTest> deserialize_puts(std::string_view text) {
  std::vector<ParameterizedUnitTest> out;
  codec::for_each_line(text, [&](const json& j) { out.push_back(codec::decode_put(j)); });
  return out;
}

}  // namespace unitcarve
