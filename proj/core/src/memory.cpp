#include "unitcarve/memory.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace unitcarve {

namespace {

constexpr std::pair<std::string_view, TrapKind> kTrapNames[] = {
    {"null-deref", TrapKind::NullDeref},     {"out-of-bounds", TrapKind::OutOfBounds},
    {"use-after-free", TrapKind::UseAfterFree}, {"div-by-zero", TrapKind::DivByZero},
    {"assert-fail", TrapKind::AssertFail},   {"stack-overflow", TrapKind::StackOverflow},
};

}  // namespace

std::string_view trap_name(TrapKind k) {
  for (auto [n, v] : kTrapNames) {
    if (v == k) return n;
  }
  return "?";
}

std::optional<TrapKind> trap_from_name(std::string_view name) {
  for (auto [n, v] : kTrapNames) {
    if (n == name) return v;
  }
  return std::nullopt;
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Value::Kind::Int:
      return a.i == b.i;
    case Value::Kind::Double:
      return std::bit_cast<uint64_t>(a.d) == std::bit_cast<uint64_t>(b.d);
    case Value::Kind::Pointer:
      return a.p == b.p;
  }
  return false;
}

std::string to_string(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int:
      return std::to_string(v.i);
    case Value::Kind::Double:
      return std::to_string(v.d);
    case Value::Kind::Pointer:
      if (v.p.is_null()) return "NULL";
      return "&" + std::to_string(v.p.segment) + "+" + std::to_string(v.p.offset);
  }
  return "?";
}

Value convert_value(const Value& v, const MiniType& t) {
  switch (t.kind) {
    case MiniType::Kind::Int:
      if (v.kind == Value::Kind::Double) {
        if (!std::isfinite(v.d) || v.d >= 9.2233720368547758e18 || v.d < -9.2233720368547758e18) {
          return Value::of_int(INT64_MIN);
        }
        return Value::of_int(static_cast<int64_t>(v.d));
      }
      if (v.kind == Value::Kind::Pointer) return Value::of_int(v.p.is_null() ? 0 : 1);
      return Value::of_int(v.i);
    case MiniType::Kind::Char: {
      int64_t x = v.kind == Value::Kind::Double ? convert_value(v, *MiniType::int_type()).i : v.i;
      return Value::of_int(static_cast<int64_t>(static_cast<uint8_t>(x)));
    }
    case MiniType::Kind::Double:
      if (v.kind == Value::Kind::Int) return Value::of_double(static_cast<double>(v.i));
      return v.kind == Value::Kind::Double ? v : Value::of_double(0.0);
    case MiniType::Kind::Pointer:
      if (v.kind == Value::Kind::Pointer) return v;
      return Value::of_pointer({});
    default:
      return v;
  }
}

SegmentId Memory::allocate(int64_t length, Origin origin, TypeRef hint, std::string global) {
  SegmentId id = map_.add(length, origin);
  SegmentData seg;
  seg.bytes.assign(static_cast<size_t>(std::max<int64_t>(length, 0)), 0);
  seg.hint = std::move(hint);
  seg.global = std::move(global);
  segments_.push_back(std::move(seg));
  return id;
}

void Memory::free_heap(Pointer p) {
  if (p.is_null()) return;
  const SegmentInfo* info = map_.find(p.segment);
  if (!info) throw Trap{TrapKind::OutOfBounds, "free of wild pointer"};
  if (!info->live) throw Trap{TrapKind::UseAfterFree, "double free"};
  if (info->origin != Origin::Heap || p.offset != 0) {
    throw Trap{TrapKind::OutOfBounds, "free of pointer not returned by malloc"};
  }
  kill(p.segment);
}

void Memory::kill(SegmentId id) {
  map_.kill(id);
  SegmentData& seg = segments_[id - 1];
  std::vector<uint8_t>().swap(seg.bytes);
  seg.pointers.clear();
}

void Memory::resize(SegmentId id, int64_t length) {
  map_.resize_entry(id, length);
  SegmentData& seg = segments_[id - 1];
  seg.bytes.resize(static_cast<size_t>(length), 0);
  for (auto it = seg.pointers.begin(); it != seg.pointers.end();) {
    if (it->first + 8 > length) {
      it = seg.pointers.erase(it);
    } else {
      ++it;
    }
  }
}

void Memory::check(Pointer p, int64_t size) const {
  if (p.is_null()) throw Trap{TrapKind::NullDeref, "null pointer dereference"};
  const SegmentInfo* info = map_.find(p.segment);
  if (!info) throw Trap{TrapKind::OutOfBounds, "wild pointer"};
  if (!info->live) throw Trap{TrapKind::UseAfterFree, "access to freed segment"};
  if (p.offset < 0 || p.offset + size > info->length) {
    throw Trap{TrapKind::OutOfBounds, "access at offset " + std::to_string(p.offset) + " size " +
                                          std::to_string(size) + " of segment length " +
                                          std::to_string(info->length)};
  }
}

Value Memory::load(Pointer p, const MiniType& t) const {
  switch (t.kind) {
    case MiniType::Kind::Char: {
      check(p, 1);
      return Value::of_int(segments_[p.segment - 1].bytes[p.offset]);
    }
    case MiniType::Kind::Int: {
      check(p, 8);
      int64_t v;
      std::memcpy(&v, segments_[p.segment - 1].bytes.data() + p.offset, 8);
      return Value::of_int(v);
    }
    case MiniType::Kind::Double: {
      check(p, 8);
      double v;
      std::memcpy(&v, segments_[p.segment - 1].bytes.data() + p.offset, 8);
      return Value::of_double(v);
    }
    case MiniType::Kind::Pointer: {
      check(p, 8);
      const auto& slots = segments_[p.segment - 1].pointers;
      auto it = slots.find(p.offset);
      return Value::of_pointer(it == slots.end() ? Pointer{} : it->second);
    }
    default:
      throw Trap{TrapKind::OutOfBounds, "load of non-scalar type"};
  }
}

void Memory::drop_slots(SegmentData& seg, int64_t offset, int64_t size) {
  if (seg.pointers.empty()) return;
  auto it = seg.pointers.lower_bound(offset - 7);
  while (it != seg.pointers.end() && it->first < offset + size) it = seg.pointers.erase(it);
}

void Memory::store(Pointer p, const MiniType& t, const Value& v) {
  switch (t.kind) {
    case MiniType::Kind::Char: {
      check(p, 1);
      SegmentData& seg = segments_[p.segment - 1];
      drop_slots(seg, p.offset, 1);
      seg.bytes[p.offset] = static_cast<uint8_t>(convert_value(v, t).i);
      return;
    }
    case MiniType::Kind::Int: {
      check(p, 8);
      SegmentData& seg = segments_[p.segment - 1];
      drop_slots(seg, p.offset, 8);
      int64_t x = convert_value(v, t).i;
      std::memcpy(seg.bytes.data() + p.offset, &x, 8);
      return;
    }
    case MiniType::Kind::Double: {
      check(p, 8);
      SegmentData& seg = segments_[p.segment - 1];
      drop_slots(seg, p.offset, 8);
      double x = convert_value(v, t).d;
      std::memcpy(seg.bytes.data() + p.offset, &x, 8);
      return;
    }
    case MiniType::Kind::Pointer: {
      check(p, 8);
      write_pointer(p.segment, p.offset, convert_value(v, t).p);
      return;
    }
    default:
      throw Trap{TrapKind::OutOfBounds, "store of non-scalar type"};
  }
}

uint8_t Memory::load_byte(Pointer p) const {
  check(p, 1);
  return segments_[p.segment - 1].bytes[p.offset];
}

std::string Memory::load_cstring(Pointer p) const {
  std::string out;
  for (;;) {
    uint8_t b = load_byte(p);
    if (b == 0) return out;
    out.push_back(static_cast<char>(b));
    ++p.offset;
  }
}

void Memory::write_bytes(SegmentId id, int64_t offset, std::span<const uint8_t> bytes) {
  check({id, offset}, static_cast<int64_t>(bytes.size()));
  SegmentData& seg = segments_[id - 1];
  drop_slots(seg, offset, static_cast<int64_t>(bytes.size()));
  std::memcpy(seg.bytes.data() + offset, bytes.data(), bytes.size());
}

void Memory::write_pointer(SegmentId id, int64_t offset, Pointer target) {
  check({id, offset}, 8);
  SegmentData& seg = segments_[id - 1];
  drop_slots(seg, offset, 8);
  std::memset(seg.bytes.data() + offset, 0, 8);
  if (!target.is_null()) seg.pointers.emplace(offset, target);
}

}  // namespace unitcarve
