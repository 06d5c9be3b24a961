#include "unitcarve/vm.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

namespace unitcarve {

std::string describe(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Ok:
      return "ok(" + std::to_string(o.exit_value) + ")";
    case Outcome::Kind::Trap:
      return "trap(" + std::string(trap_name(o.trap)) + ")";
    case Outcome::Kind::StepLimit:
      return "step-limit-exceeded";
    case Outcome::Kind::SetupError:
      return "setup-error";
  }
  return "?";
}

namespace {

struct StepLimitHit {};

enum class Flow { Normal, Break, Continue, Return };

constexpr size_t kMaxOutput = 1 << 20;

bool is_ptr(const TypeRef& t) {
  return t->kind == MiniType::Kind::Pointer || t->kind == MiniType::Kind::Array;
}

int64_t wrap_add(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
int64_t wrap_sub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
int64_t wrap_mul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

double as_double(const Value& v) {
  return v.kind == Value::Kind::Double ? v.d : static_cast<double>(v.i);
}

Value zero_of(const MiniType& t) {
  switch (t.kind) {
    case MiniType::Kind::Double:
      return Value::of_double(0.0);
    case MiniType::Kind::Pointer:
      return Value::of_pointer({});
    default:
      return Value::of_int(0);
  }
}

TypeRef storage_hint(const TypeRef& t) { return t->kind == MiniType::Kind::Array ? t->elem : t; }

// C atoi: optional whitespace and sign, then digits; wraps on overflow.
int64_t mini_atoi(const std::string& s) {
  size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || (s[i] >= '\t' && s[i] <= '\r'))) ++i;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  uint64_t v = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') v = v * 10 + static_cast<uint64_t>(s[i++] - '0');
  return static_cast<int64_t>(neg ? 0 - v : v);
}

struct Frame {
  std::vector<Value> regs;
  std::vector<SegmentId> segs;  // 0: the local lives in regs
  Value ret;
};

struct OpenEvent {
  size_t call_index;
  std::vector<uint8_t> arms;
};

class Interp {
 public:
  Interp(const Program& prog, const Limits& limits, const RunOptions& options, const SystemInput& input)
      : prog_(prog), limits_(limits), options_(options), input_(input), memory_(prog.records) {
    counts_.resize(prog.functions.size());
    for (size_t i = 0; i < prog.functions.size(); ++i) counts_[i].assign(2 * prog.functions[i].cond_count, 0);
    invocations_.assign(prog.functions.size(), 0);
    profiled_.assign(prog.functions.size(), false);
    for (const auto& name : options.profile) {
      int fi = prog.function_index(name);
      if (fi >= 0) profiled_[fi] = true;
    }
    if (options.trace) {
      trace_.emplace();
      input_ref_ = input.ref();
      open_.resize(prog.functions.size());
    }
  }

  Memory& memory() { return memory_; }

  void init_globals() {
    for (const auto& g : prog_.globals) {
      SegmentId id = memory_.allocate(prog_.records.size_of(g.type), Origin::Global, storage_hint(g.type), g.name);
      global_segs_.push_back(id);
      global_by_seg_[id] = static_cast<int>(global_segs_.size() - 1);
      if (const auto* iv = std::get_if<int64_t>(&g.init.value)) {
        memory_.store({id, 0}, *g.type, Value::of_int(*iv));
      } else if (const auto* dv = std::get_if<double>(&g.init.value)) {
        memory_.store({id, 0}, *g.type, Value::of_double(*dv));
      } else if (const auto* sv = std::get_if<std::string>(&g.init.value)) {
        auto n = std::min<size_t>(sv->size(), memory_.map().find(id)->length);
        memory_.write_bytes(id, 0, {reinterpret_cast<const uint8_t*>(sv->data()), n});
      }
    }
    for (const auto& lit : prog_.string_literals) {
      SegmentId id = memory_.allocate(static_cast<int64_t>(lit.size()) + 1, Origin::Static, MiniType::char_type());
      memory_.write_bytes(id, 0, {reinterpret_cast<const uint8_t*>(lit.data()), lit.size()});
      literal_segs_.push_back(id);
    }
  }

  SegmentId global_segment(const std::string& name) const {
    int g = prog_.global_index(name);
    return g < 0 ? 0 : global_segs_[g];
  }

  void bind_input(const std::string& source, SegmentId seg) { inputs_[source] = seg; }

  // Runs `fn` to completion and converts traps/limits into an outcome.
  Outcome execute(int fn, std::vector<Value> args) {
    try {
      Value v = call(fn, std::move(args));
      int64_t code = 0;
      if (v.kind == Value::Kind::Int) code = v.i;
      if (v.kind == Value::Kind::Double) code = convert_value(v, *MiniType::int_type()).i;
      return Outcome::ok(code);
    } catch (const Trap& t) {
      return Outcome::trapped(t.kind, t.detail, cur_fn_ >= 0 ? prog_.functions[cur_fn_].name : "", cur_line_);
    } catch (const StepLimitHit&) {
      return Outcome::step_limit();
    }
  }

  RunResult finish(Outcome outcome) {
    RunResult r;
    r.outcome = std::move(outcome);
    for (size_t f = 0; f < counts_.size(); ++f) {
      for (size_t k = 0; k < counts_[f].size(); ++k) {
        if (counts_[f][k] == 0) continue;
        r.coverage.hit({prog_.functions[f].name, static_cast<int>(k / 2), k % 2 ? Arm::Else : Arm::Then},
                       counts_[f][k]);
      }
      if (invocations_[f]) r.invocations[prog_.functions[f].name] = invocations_[f];
    }
    if (profile_depth_ > 0) profile_ns_ += elapsed_ns(profile_start_);
    r.profile_ns = profile_ns_;
    r.steps = steps_;
    r.output = std::move(output_);
    if (trace_) {
      for (size_t f = 0; f < open_.size(); ++f) {
        for (auto& ev : open_[f]) close_event(static_cast<int>(f), ev, false);
      }
      trace_->end = TraceEnd{r.outcome, input_, r.output};
      r.trace = std::move(trace_);
    }
    return r;
  }

 private:
  static int64_t elapsed_ns(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - since).count();
  }

  void step() {
    if (++steps_ > limits_.max_steps) throw StepLimitHit{};
  }

  int64_t size_of(const TypeRef& t) const { return prog_.records.size_of(*t); }

  // ------------------------------------------------------------ calls

  Value call(int fi, std::vector<Value> args) {
    if (depth_ >= limits_.max_call_depth) {
      throw Trap{TrapKind::StackOverflow, "call depth exceeds " + std::to_string(limits_.max_call_depth)};
    }
    const FunctionDef& f = prog_.functions[fi];
    args.resize(f.params.size(), Value::of_int(0));
    for (size_t i = 0; i < f.params.size(); ++i) args[i] = convert_value(args[i], *f.params[i].type);
    ++invocations_[fi];
    if (trace_) open_call(fi, args);
    bool start_profile = profiled_[fi] && profile_depth_ == 0;
    if (profiled_[fi]) {
      if (start_profile) profile_start_ = std::chrono::steady_clock::now();
      ++profile_depth_;
    }

    Frame frame;
    frame.regs.assign(f.locals.size(), Value{});
    frame.segs.assign(f.locals.size(), 0);
    for (size_t i = 0; i < f.locals.size(); ++i) {
      const LocalSlot& l = f.locals[i];
      if (l.addressed || l.type->is_aggregate()) {
        frame.segs[i] = memory_.allocate(size_of(l.type), Origin::Stack, storage_hint(l.type));
      } else {
        frame.regs[i] = zero_of(*l.type);
      }
    }
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (frame.segs[i]) {
        memory_.store({frame.segs[i], 0}, *f.params[i].type, args[i]);
      } else {
        frame.regs[i] = args[i];
      }
    }

    int saved_fn = cur_fn_;
    int saved_line = cur_line_;
    Frame* saved_frame = frame_;
    cur_fn_ = fi;
    frame_ = &frame;
    ++depth_;
    frame.ret = zero_of(*f.return_type);
    exec(*f.body);
    --depth_;
    frame_ = saved_frame;
    cur_fn_ = saved_fn;
    cur_line_ = saved_line;

    for (SegmentId s : frame.segs) {
      if (s) memory_.kill(s);
    }
    if (profiled_[fi]) {
      --profile_depth_;
      if (start_profile) profile_ns_ += elapsed_ns(profile_start_);
    }
    if (trace_) {
      OpenEvent ev = std::move(open_[fi].back());
      open_[fi].pop_back();
      close_event(fi, ev, true);
    }
    if (f.return_type->kind == MiniType::Kind::Void) return Value::of_int(0);
    return convert_value(frame.ret, *f.return_type);
  }

  void open_call(int fi, const std::vector<Value>& args) {
    const FunctionDef& f = prog_.functions[fi];
    std::vector<SnapshotRoot> roots;
    for (size_t i = 0; i < f.params.size(); ++i) {
      roots.push_back({"arg" + std::to_string(i), static_cast<int>(i), f.params[i].type, args[i]});
    }
    for (size_t g = 0; g < prog_.globals.size(); ++g) roots.push_back(global_root(static_cast<int>(g)));
    CallEvent ev;
    ev.seq = next_seq_++;
    ev.callee = f.name;
    ev.input_ref = input_ref_;
    ev.graph = snapshot(memory_, roots, limits_.node_budget);
    trace_->calls.push_back(std::move(ev));
    open_[fi].push_back({trace_->calls.size() - 1, std::vector<uint8_t>(2 * f.cond_count, 0)});
  }

  void close_event(int fi, OpenEvent& ev, bool completed) {
    CallEvent& call = trace_->calls[ev.call_index];
    call.completed = completed;
    for (size_t k = 0; k < ev.arms.size(); ++k) {
      if (ev.arms[k]) call.footprint.insert({prog_.functions[fi].name, static_cast<int>(k / 2), k % 2 ? Arm::Else : Arm::Then});
    }
  }

  SnapshotRoot global_root(int g) const {
    const GlobalDef& def = prog_.globals[g];
    Pointer storage{global_segs_[g], 0};
    Value v = def.type->is_aggregate() ? Value::of_pointer(storage) : memory_.load(storage, *def.type);
    return {def.name, -1, def.type, v};
  }

  void emit_global_update(int g) {
    SnapshotRoot root = global_root(g);
    GlobalUpdate up;
    up.seq = next_seq_++;
    up.name = root.name;
    up.graph = snapshot(memory_, std::span<const SnapshotRoot>(&root, 1), limits_.node_budget);
    trace_->globals.push_back(std::move(up));
  }

  void branch(int cond, bool taken) {
    size_t k = static_cast<size_t>(2 * cond + (taken ? 0 : 1));
    ++counts_[cur_fn_][k];
    if (trace_) {
      for (auto& ev : open_[cur_fn_]) ev.arms[k] = 1;
    }
  }

  // ------------------------------------------------------------ statements

  Flow exec(const Stmt& s) {
    cur_line_ = s.loc.line;
    switch (s.kind) {
      case Stmt::Kind::Block:
        for (const auto& b : s.body) {
          Flow fl = exec(*b);
          if (fl != Flow::Normal) return fl;
        }
        return Flow::Normal;
      case Stmt::Kind::Decl: {
        step();
        SegmentId seg = frame_->segs[s.slot];
        if (seg) {
          int64_t n = memory_.map().find(seg)->length;
          std::vector<uint8_t> zeros(static_cast<size_t>(n), 0);
          memory_.write_bytes(seg, 0, zeros);
          if (s.value) memory_.store({seg, 0}, *s.decl_type, eval(*s.value));
        } else {
          frame_->regs[s.slot] = s.value ? convert_value(eval(*s.value), *s.decl_type) : zero_of(*s.decl_type);
        }
        return Flow::Normal;
      }
      case Stmt::Kind::Assign: {
        step();
        Value v = eval(*s.value);
        cur_line_ = s.loc.line;
        Place p = place(*s.target);
        store(p, *s.target->type, v);
        after_store(s, p);
        return Flow::Normal;
      }
      case Stmt::Kind::CompoundAssign:
      case Stmt::Kind::IncDec: {
        step();
        Value rhs = s.value ? eval(*s.value) : Value::of_int(1);
        cur_line_ = s.loc.line;
        Place p = place(*s.target);
        const TypeRef& tt = s.target->type;
        Value cur = load(p, *tt);
        Value next;
        bool add = s.op == BinOp::Add;
        if (tt->is_pointer()) {
          int64_t d = wrap_mul(rhs.i, elem_size(tt));
          next = cur;
          next.p.offset = add ? wrap_add(cur.p.offset, d) : wrap_sub(cur.p.offset, d);
        } else if (tt->kind == MiniType::Kind::Double || rhs.kind == Value::Kind::Double) {
          next = Value::of_double(add ? as_double(cur) + as_double(rhs) : as_double(cur) - as_double(rhs));
        } else {
          next = Value::of_int(add ? wrap_add(cur.i, rhs.i) : wrap_sub(cur.i, rhs.i));
        }
        store(p, *tt, next);
        after_store(s, p);
        return Flow::Normal;
      }
      case Stmt::Kind::ExprStmt:
        step();
        eval(*s.value);
        return Flow::Normal;
      case Stmt::Kind::If: {
        step();
        bool taken = eval(*s.cond).truthy();
        branch(s.cond_index, taken);
        if (taken) return exec(*s.body[0]);
        if (s.body.size() > 1) return exec(*s.body[1]);
        return Flow::Normal;
      }
      case Stmt::Kind::While:
        for (;;) {
          step();
          cur_line_ = s.loc.line;
          bool taken = eval(*s.cond).truthy();
          branch(s.cond_index, taken);
          if (!taken) return Flow::Normal;
          Flow fl = exec(*s.body[0]);
          if (fl == Flow::Break) return Flow::Normal;
          if (fl == Flow::Return) return fl;
        }
      case Stmt::Kind::Return:
        step();
        if (s.value) frame_->ret = eval(*s.value);
        return Flow::Return;
      case Stmt::Kind::Break:
        step();
        return Flow::Break;
      case Stmt::Kind::Continue:
        step();
        return Flow::Continue;
    }
    return Flow::Normal;
  }

  struct Place {
    int reg = -1;  // >= 0: register slot of the current frame
    Pointer p;
  };

  void after_store(const Stmt& s, const Place& p) {
    if (!trace_) return;
    int g = s.global_root;
    if (g < 0 && p.reg < 0) {
      auto it = global_by_seg_.find(p.p.segment);
      if (it != global_by_seg_.end()) g = it->second;
    }
    if (g >= 0) emit_global_update(g);
  }

  Value load(const Place& p, const MiniType& t) {
    if (p.reg >= 0) return frame_->regs[p.reg];
    return memory_.load(p.p, t);
  }

  void store(const Place& p, const MiniType& t, const Value& v) {
    if (p.reg >= 0) {
      frame_->regs[p.reg] = convert_value(v, t);
    } else {
      memory_.store(p.p, t, v);
    }
  }

  int64_t elem_size(const TypeRef& ptr_type) const {
    return ptr_type->elem->kind == MiniType::Kind::Void ? 1 : size_of(ptr_type->elem);
  }

  // ------------------------------------------------------------ expressions

  Place place(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Local: {
        SegmentId seg = frame_->segs[e.slot];
        if (seg) return {-1, {seg, 0}};
        return {e.slot, {}};
      }
      case Expr::Kind::Global:
        return {-1, {global_segs_[e.slot], 0}};
      case Expr::Kind::Unary:
        return {-1, eval(*e.kids[0]).p};
      case Expr::Kind::Index: {
        Pointer base = eval(*e.kids[0]).p;
        int64_t idx = eval(*e.kids[1]).i;
        base.offset = wrap_add(base.offset, wrap_mul(idx, size_of(e.type)));
        return {-1, base};
      }
      case Expr::Kind::Field: {
        Place base = place(*e.kids[0]);
        base.p.offset = wrap_add(base.p.offset, e.field_offset);
        return base;
      }
      case Expr::Kind::Arrow: {
        Pointer base = eval(*e.kids[0]).p;
        base.offset = wrap_add(base.offset, e.field_offset);
        return {-1, base};
      }
      default:
        throw Trap{TrapKind::OutOfBounds, "not an lvalue"};
    }
  }

  Value eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::SizeOf:
        return Value::of_int(e.ival);
      case Expr::Kind::DoubleLit:
        return Value::of_double(e.dval);
      case Expr::Kind::StrLit:
        return Value::of_pointer({literal_segs_[e.slot], 0});
      case Expr::Kind::Null:
        return Value::of_pointer({});
      case Expr::Kind::Local:
        if (!frame_->segs[e.slot]) return frame_->regs[e.slot];
        [[fallthrough]];
      case Expr::Kind::Global:
      case Expr::Kind::Index:
      case Expr::Kind::Field:
      case Expr::Kind::Arrow: {
        Place p = place(e);
        if (e.type->kind == MiniType::Kind::Array) return Value::of_pointer(p.p);
        return load(p, *e.type);
      }
      case Expr::Kind::Unary:
        return eval_unary(e);
      case Expr::Kind::Binary:
        return eval_binary(e);
      case Expr::Kind::Call: {
        std::vector<Value> args;
        args.reserve(e.kids.size());
        for (const auto& k : e.kids) args.push_back(eval(*k));
        return call(e.slot, std::move(args));
      }
      case Expr::Kind::BuiltinCall:
        return eval_builtin(e);
    }
    return Value::of_int(0);
  }

  Value eval_unary(const Expr& e) {
    switch (e.uop) {
      case UnOp::Neg: {
        Value v = eval(*e.kids[0]);
        if (v.kind == Value::Kind::Double) return Value::of_double(-v.d);
        return Value::of_int(wrap_sub(0, v.i));
      }
      case UnOp::Not:
        return Value::of_int(eval(*e.kids[0]).truthy() ? 0 : 1);
      case UnOp::BitNot:
        return Value::of_int(~eval(*e.kids[0]).i);
      case UnOp::Deref: {
        Pointer p = eval(*e.kids[0]).p;
        if (e.type->kind == MiniType::Kind::Array) return Value::of_pointer(p);
        return memory_.load(p, *e.type);
      }
      case UnOp::AddrOf: {
        Place p = place(*e.kids[0]);
        if (p.reg >= 0) throw Trap{TrapKind::OutOfBounds, "address of register local"};
        return Value::of_pointer(p.p);
      }
    }
    return Value::of_int(0);
  }

  static Pointer as_pointer(const Value& v) { return v.kind == Value::Kind::Pointer ? v.p : Pointer{}; }

  Value eval_binary(const Expr& e) {
    if (e.bop == BinOp::And) {
      if (!eval(*e.kids[0]).truthy()) return Value::of_int(0);
      return Value::of_int(eval(*e.kids[1]).truthy() ? 1 : 0);
    }
    if (e.bop == BinOp::Or) {
      if (eval(*e.kids[0]).truthy()) return Value::of_int(1);
      return Value::of_int(eval(*e.kids[1]).truthy() ? 1 : 0);
    }
    const TypeRef& lt = e.kids[0]->type;
    const TypeRef& rt = e.kids[1]->type;
    Value l = eval(*e.kids[0]);
    Value r = eval(*e.kids[1]);
    bool lp = is_ptr(lt);
    bool rp = is_ptr(rt);
    switch (e.bop) {
      case BinOp::Add:
        if (lp) return offset_by(l, r.i, e.type);
        if (rp) return offset_by(r, l.i, e.type);
        break;
      case BinOp::Sub:
        if (lp && rp) {
          if (l.p.segment != r.p.segment) throw Trap{TrapKind::OutOfBounds, "subtraction of unrelated pointers"};
          int64_t sz = lt->kind == MiniType::Kind::Array ? size_of(lt->elem) : elem_size(lt);
          return Value::of_int(wrap_sub(l.p.offset, r.p.offset) / (sz ? sz : 1));
        }
        if (lp) return offset_by(l, wrap_sub(0, r.i), e.type);
        break;
      case BinOp::Eq:
      case BinOp::Ne:
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge:
        if (lp || rp) return compare_pointers(e.bop, as_pointer(l), as_pointer(r));
        break;
      default:
        break;
    }
    bool dbl = l.kind == Value::Kind::Double || r.kind == Value::Kind::Double;
    if (dbl) {
      double a = as_double(l);
      double b = as_double(r);
      switch (e.bop) {
        case BinOp::Add: return Value::of_double(a + b);
        case BinOp::Sub: return Value::of_double(a - b);
        case BinOp::Mul: return Value::of_double(a * b);
        case BinOp::Div: return Value::of_double(a / b);
        case BinOp::Lt: return Value::of_int(a < b);
        case BinOp::Le: return Value::of_int(a <= b);
        case BinOp::Gt: return Value::of_int(a > b);
        case BinOp::Ge: return Value::of_int(a >= b);
        case BinOp::Eq: return Value::of_int(a == b);
        case BinOp::Ne: return Value::of_int(a != b);
        default: break;
      }
    }
    int64_t a = l.i;
    int64_t b = r.i;
    switch (e.bop) {
      case BinOp::Add: return Value::of_int(wrap_add(a, b));
      case BinOp::Sub: return Value::of_int(wrap_sub(a, b));
      case BinOp::Mul: return Value::of_int(wrap_mul(a, b));
      case BinOp::Div:
        if (b == 0) throw Trap{TrapKind::DivByZero, "integer division by zero"};
        if (a == INT64_MIN && b == -1) return Value::of_int(INT64_MIN);
        return Value::of_int(a / b);
      case BinOp::Mod:
        if (b == 0) throw Trap{TrapKind::DivByZero, "integer modulo by zero"};
        if (b == -1) return Value::of_int(0);
        return Value::of_int(a % b);
      case BinOp::Lt: return Value::of_int(a < b);
      case BinOp::Le: return Value::of_int(a <= b);
      case BinOp::Gt: return Value::of_int(a > b);
      case BinOp::Ge: return Value::of_int(a >= b);
      case BinOp::Eq: return Value::of_int(a == b);
      case BinOp::Ne: return Value::of_int(a != b);
      case BinOp::BitAnd: return Value::of_int(a & b);
      case BinOp::BitOr: return Value::of_int(a | b);
      case BinOp::BitXor: return Value::of_int(a ^ b);
      case BinOp::Shl: return Value::of_int(static_cast<int64_t>(static_cast<uint64_t>(a) << (b & 63)));
      case BinOp::Shr: return Value::of_int(a >> (b & 63));
      default: break;
    }
    return Value::of_int(0);
  }

  Value offset_by(Value ptr, int64_t n, const TypeRef& ptr_type) {
    ptr.p.offset = wrap_add(ptr.p.offset, wrap_mul(n, elem_size(ptr_type)));
    return ptr;
  }

  static Value compare_pointers(BinOp op, Pointer a, Pointer b) {
    if (op == BinOp::Eq) return Value::of_int(a == b);
    if (op == BinOp::Ne) return Value::of_int(!(a == b));
    if (a.segment != b.segment) throw Trap{TrapKind::OutOfBounds, "ordering of unrelated pointers"};
    switch (op) {
      case BinOp::Lt: return Value::of_int(a.offset < b.offset);
      case BinOp::Le: return Value::of_int(a.offset <= b.offset);
      case BinOp::Gt: return Value::of_int(a.offset > b.offset);
      default: return Value::of_int(a.offset >= b.offset);
    }
  }

  void emit_output(std::string_view s) {
    if (output_.size() >= kMaxOutput) return;
    output_.append(s.substr(0, kMaxOutput - output_.size()));
  }

  Pointer input_segment(const std::string& source) {
    auto it = inputs_.find(source);
    if (it != inputs_.end()) return {it->second, 0};
    const InputSource* src = input_.find(source);
    std::string_view content = src ? std::string_view(src->content) : std::string_view();
    SegmentId id = memory_.allocate(static_cast<int64_t>(content.size()) + 1, Origin::Input, MiniType::char_type(), source);
    memory_.write_bytes(id, 0, {reinterpret_cast<const uint8_t*>(content.data()), content.size()});
    inputs_[source] = id;
    return {id, 0};
  }

  int64_t arg_count() const {
    int64_t n = 0;
    while (input_.find("arg" + std::to_string(n))) ++n;
    return n;
  }

  Value eval_builtin(const Expr& e) {
    switch (e.builtin) {
      case Builtin::Input:
        return Value::of_pointer(input_segment("stdin"));
      case Builtin::Arg: {
        int64_t i = eval(*e.kids[0]).i;
        if (i < 0 || i >= arg_count()) return Value::of_pointer({});
        return Value::of_pointer(input_segment("arg" + std::to_string(i)));
      }
      case Builtin::Argc:
        return Value::of_int(arg_count());
      case Builtin::Malloc: {
        int64_t n = eval(*e.kids[0]).i;
        if (n < 0 || n > (int64_t{1} << 24)) return Value::of_pointer({});
        return Value::of_pointer({memory_.allocate(n, Origin::Heap), 0});
      }
      case Builtin::Free:
        memory_.free_heap(as_pointer(eval(*e.kids[0])));
        return Value::of_int(0);
      case Builtin::Strlen: {
        Pointer p = as_pointer(eval(*e.kids[0]));
        memory_.check(p, 1);
        const auto& bytes = memory_.data(p.segment).bytes;
        const void* nul = std::memchr(bytes.data() + p.offset, 0, bytes.size() - static_cast<size_t>(p.offset));
        if (!nul) throw Trap{TrapKind::OutOfBounds, "strlen ran past the end of its segment"};
        return Value::of_int(static_cast<const uint8_t*>(nul) - (bytes.data() + p.offset));
      }
      case Builtin::Atoi:
        return Value::of_int(mini_atoi(memory_.load_cstring(as_pointer(eval(*e.kids[0])))));
      case Builtin::PrintInt: {
        Value v = eval(*e.kids[0]);
        emit_output(std::to_string(convert_value(v, *MiniType::int_type()).i));
        return Value::of_int(0);
      }
      case Builtin::PrintStr:
        emit_output(memory_.load_cstring(as_pointer(eval(*e.kids[0]))));
        return Value::of_int(0);
      case Builtin::Assert:
        if (!eval(*e.kids[0]).truthy()) throw Trap{TrapKind::AssertFail, "assertion failed"};
        return Value::of_int(0);
    }
    return Value::of_int(0);
  }

  const Program& prog_;
  const Limits& limits_;
  const RunOptions& options_;
  const SystemInput& input_;
  Memory memory_;

  std::vector<SegmentId> global_segs_;
  std::unordered_map<SegmentId, int> global_by_seg_;
  std::vector<SegmentId> literal_segs_;
  std::map<std::string, SegmentId> inputs_;

  Frame* frame_ = nullptr;
  int depth_ = 0;
  int cur_fn_ = -1;
  int cur_line_ = 0;
  int64_t steps_ = 0;
  std::string output_;

  std::vector<std::vector<uint64_t>> counts_;
  std::vector<uint64_t> invocations_;
  std::vector<bool> profiled_;
  int profile_depth_ = 0;
  std::chrono::steady_clock::time_point profile_start_;
  int64_t profile_ns_ = 0;

  std::optional<Trace> trace_;
  std::string input_ref_;
  std::vector<std::vector<OpenEvent>> open_;
  int64_t next_seq_ = 1;
};

}  // namespace

RunResult run_system(const Program& program, const SystemInput& input, const Limits& limits,
                     const RunOptions& options) {
  Interp vm(program, limits, options, input);
  vm.init_globals();
  return vm.finish(vm.execute(program.main_index(), {}));
}

RunResult run_unit(const Program& program, const std::string& callee, const SetupPlan& plan,
                   const SystemInput& input, const Limits& limits, const RunOptions& options) {
  Interp vm(program, limits, options, input);
  vm.init_globals();
  int fi = program.function_index(callee);
  if (fi < 0) return vm.finish(Outcome::setup_error("no function named '" + callee + "'"));
  Materialized mat;
  try {
    mat = materialize(plan, vm.memory(), [&](const std::string& name) { return vm.global_segment(name); });
  } catch (const SetupError& e) {
    return vm.finish(Outcome::setup_error(e.what()));
  }
  for (const auto& step : plan.steps) {
    if (const auto* a = std::get_if<PlanAllocate>(&step)) {
      if (a->origin == Origin::Input && !a->global.empty() && a->live) {
        vm.bind_input(a->global, mat.node_segments[a->node - 1]);
      }
    }
  }
  if (mat.args.size() != program.functions[fi].params.size()) {
    return vm.finish(Outcome::setup_error("plan binds " + std::to_string(mat.args.size()) + " arguments, '" +
                                          callee + "' takes " +
                                          std::to_string(program.functions[fi].params.size())));
  }
  return vm.finish(vm.execute(fi, std::move(mat.args)));
}

std::map<std::string, MemoryGraph> initial_globals(const Program& program) {
  SystemInput none;
  Limits limits;
  limits.node_budget = NodeBudget::unlimited();
  RunOptions options;
  Interp vm(program, limits, options, none);
  vm.init_globals();
  std::map<std::string, MemoryGraph> out;
  for (const auto& g : program.globals) {
    SegmentId seg = vm.global_segment(g.name);
    Value v = g.type->is_aggregate() ? Value::of_pointer({seg, 0}) : vm.memory().load({seg, 0}, *g.type);
    SnapshotRoot root{g.name, -1, g.type, v};
    out.emplace(g.name, snapshot(vm.memory(), std::span<const SnapshotRoot>(&root, 1), limits.node_budget));
  }
  return out;
}

}  // namespace unitcarve
