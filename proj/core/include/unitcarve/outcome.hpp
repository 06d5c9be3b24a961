#pragma once

#include <cstdint>
#include <string>

#include "unitcarve/memory.hpp"

namespace unitcarve {

struct Outcome {
  enum class Kind { Ok, Trap, StepLimit, SetupError };

  Kind kind = Kind::Ok;
  int64_t exit_value = 0;        // Ok
  TrapKind trap = TrapKind::NullDeref;  // Trap
  std::string detail;            // Trap / SetupError
  std::string function;          // where the trap happened
  int line = 0;

  static Outcome ok(int64_t v) { return {Kind::Ok, v, {}, {}, {}, 0}; }
  static Outcome trapped(TrapKind k, std::string detail, std::string function, int line) {
    return {Kind::Trap, 0, k, std::move(detail), std::move(function), line};
  }
  static Outcome step_limit() { return {Kind::StepLimit, 0, {}, {}, {}, 0}; }
  static Outcome setup_error(std::string why) { return {Kind::SetupError, 0, {}, std::move(why), {}, 0}; }

  // Only program defects count; harness limits and setup problems do not.
  bool is_failure() const { return kind == Kind::Trap; }
};

// "ok(0)", "trap(out-of-bounds)", "step-limit-exceeded", "setup-error".
std::string describe(const Outcome& o);

inline bool same_outcome(const Outcome& a, const Outcome& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Outcome::Kind::Ok:
      return a.exit_value == b.exit_value;
    case Outcome::Kind::Trap:
      return a.trap == b.trap && a.function == b.function && a.line == b.line;
    default:
      return true;
  }
}

}  // namespace unitcarve
