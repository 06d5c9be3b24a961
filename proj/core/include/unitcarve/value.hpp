#pragma once

#include <cstdint>
#include <string>

#include "unitcarve/types.hpp"

namespace unitcarve {

using SegmentId = uint32_t;

// A MiniC pointer: segment 0 is null. Offsets may leave the segment; only
// accesses are bounds-checked.
struct Pointer {
  SegmentId segment = 0;
  int64_t offset = 0;

  bool is_null() const { return segment == 0; }
  friend bool operator==(const Pointer&, const Pointer&) = default;
};

// Runtime scalar. Chars are carried as Int and truncated on store.
struct Value {
  enum class Kind : uint8_t { Int, Double, Pointer };

  Kind kind = Kind::Int;
  int64_t i = 0;
  double d = 0.0;
  Pointer p;

  static Value of_int(int64_t v) { return Value{Kind::Int, v, 0.0, {}}; }
  static Value of_double(double v) { return Value{Kind::Double, 0, v, {}}; }
  static Value of_pointer(Pointer v) { return Value{Kind::Pointer, 0, 0.0, v}; }

  bool truthy() const {
    switch (kind) {
      case Kind::Int:
        return i != 0;
      case Kind::Double:
        return d != 0.0;
      case Kind::Pointer:
        return !p.is_null();
    }
    return false;
  }
};

bool operator==(const Value& a, const Value& b);
std::string to_string(const Value& v);

// Converts a runtime value to the representation stored for `t`.
Value convert_value(const Value& v, const MiniType& t);

}  // namespace unitcarve
