#include "doctest.h"
#include "testkit.hpp"
#include "unitcarve/vm.hpp"

using namespace unitcarve;

namespace {

RunResult run_src(std::string_view src, std::string stdin_text = "", std::vector<std::string> args = {}) {
  return run_system(parse_program(src), SystemInput::from_stdin(std::move(stdin_text), std::move(args)));
}

std::string calc(const std::string& text) { return run_system(testkit::subject("calc"), testkit::stdin_input(text)).output; }

}  // namespace

TEST_CASE("calc evaluates sums and differences") {
  CHECK(calc("1 + 2") == "3\n");
  CHECK(calc("10 + 20") == "30\n");
  CHECK(calc("99 + 1") == "100\n");
  CHECK(calc("1234 - 567") == "667\n");
  CHECK(calc("1 + 2\n") == "3\n");
  CHECK(calc("1 + 2 x") == "error\n");
}

TEST_CASE("calc oracle over small operands") {
  // Independent oracle: host integer arithmetic.
  Rng rng(11);
  for (int i = 0; i < 40; ++i) {
    int64_t a = rng.between(0, 99999);
    int64_t b = rng.between(0, 99999);
    bool plus = rng.below(2) == 0;
    std::string text = std::to_string(a) + (plus ? " + " : " - ") + std::to_string(b);
    int64_t want = plus ? a + b : a - b;
    CAPTURE(text);
    CHECK(calc(text) == std::to_string(want) + "\n");
  }
}

TEST_CASE("the planted calc defect traps out of bounds") {
  auto r = run_system(testkit::subject("calc"), testkit::stdin_input("1111111 + 2"));
  REQUIRE(r.outcome.kind == Outcome::Kind::Trap);
  CHECK(r.outcome.trap == TrapKind::OutOfBounds);
  CHECK(r.outcome.function == "add");
}

TEST_CASE("every trap kind") {
  auto trap_of = [](std::string_view src) {
    auto r = run_src(src);
    REQUIRE(r.outcome.kind == Outcome::Kind::Trap);
    return r.outcome.trap;
  };
  CHECK(trap_of("int main() { int* p = NULL; return *p; }") == TrapKind::NullDeref);
  CHECK(trap_of("int main() { int a[2]; return a[2]; }") == TrapKind::OutOfBounds);
  CHECK(trap_of("int main() { char* s = malloc(3); s[-1] = 0; return 0; }") == TrapKind::OutOfBounds);
  CHECK(trap_of("int main() { int* p = malloc(8); free(p); return *p; }") == TrapKind::UseAfterFree);
  CHECK(trap_of("int main() { int* p = malloc(8); free(p); free(p); return 0; }") == TrapKind::UseAfterFree);
  CHECK(trap_of("int main() { int z = 0; return 5 / z; }") == TrapKind::DivByZero);
  CHECK(trap_of("int main() { int z = 0; return 5 % z; }") == TrapKind::DivByZero);
  CHECK(trap_of("int main() { assert(1 == 2); return 0; }") == TrapKind::AssertFail);
  CHECK(trap_of("int f(int n) { return f(n + 1); } int main() { return f(0); }") == TrapKind::StackOverflow);
}

TEST_CASE("trap location") {
  auto r = run_src("int f(int* p) {\n  return *p;\n}\nint main() {\n  return f(NULL);\n}\n");
  CHECK(r.outcome.function == "f");
  CHECK(r.outcome.line == 2);
  CHECK(describe(r.outcome) == "trap(null-deref)");
}

TEST_CASE("step limit") {
  Program p = parse_program("int main() { while (1) { } return 0; }");
  Limits lim;
  lim.max_steps = 1000;
  auto r = run_system(p, {}, lim);
  CHECK(r.outcome.kind == Outcome::Kind::StepLimit);
  CHECK_FALSE(r.outcome.is_failure());
  CHECK(describe(r.outcome) == "step-limit-exceeded");
}

TEST_CASE("integer semantics wrap and truncate toward zero") {
  CHECK(run_src("int main() { int m = 9223372036854775807; return m + 1 == -9223372036854775807 - 1; }")
            .outcome.exit_value == 1);
  CHECK(run_src("int main() { return -7 / 2; }").outcome.exit_value == -3);
  CHECK(run_src("int main() { return -7 % 2; }").outcome.exit_value == -1);
  CHECK(run_src("int main() { char c = 300; return c; }").outcome.exit_value == 44);
  CHECK(run_src("int main() { char c = 0; c = c - 1; return c; }").outcome.exit_value == 255);
  CHECK(run_src("int main() { return 1 << 65; }").outcome.exit_value == 2);
  CHECK(run_src("int main() { double d = 7; return d / 2 > 3.4; }").outcome.exit_value == 1);
}

TEST_CASE("builtins see the system input") {
  const char* src = R"(
int main() {
  char* in = input();
  print_int(strlen(in));
  print_str(" ");
  print_int(argc());
  print_str(" ");
  print_int(atoi(arg(1)));
  return 0;
}
)";
  auto r = run_src(src, "hello", {"prog", "42"});
  CHECK(r.outcome.kind == Outcome::Kind::Ok);
  CHECK(r.output == "5 2 42");
}

TEST_CASE("locals are zero-initialized and short-circuit skips the right side") {
  auto r = run_src(R"(
int main() {
  int x;
  int* p = NULL;
  if (p != NULL && *p == 1) { return 9; }
  return x;
}
)");
  CHECK(r.outcome.kind == Outcome::Kind::Ok);
  CHECK(r.outcome.exit_value == 0);
}

TEST_CASE("coverage counts arms per conditional") {
  Program p = parse_program(R"(
int main() {
  int i = 0;
  while (i < 3) { i++; }
  if (i == 3) { return 1; }
  return 0;
}
)");
  auto r = run_system(p, {});
  CHECK(r.coverage.count({"main", 0, Arm::Then}) == 3);
  CHECK(r.coverage.count({"main", 0, Arm::Else}) == 1);
  CHECK(r.coverage.count({"main", 1, Arm::Then}) == 1);
  CHECK_FALSE(r.coverage.covers({"main", 1, Arm::Else}));
  CHECK(r.invocations.at("main") == 1);
}

TEST_CASE("runs are deterministic") {
  const Program& p = testkit::subject("revlines");
  auto in = testkit::stdin_input("alpha\nbeta\ngamma\n");
  auto a = run_system(p, in, {}, {true, {}});
  auto b = run_system(p, in, {}, {true, {}});
  CHECK(a.output == b.output);
  CHECK(a.coverage == b.coverage);
  CHECK(a.steps == b.steps);
  CHECK(serialize_trace(*a.trace) == serialize_trace(*b.trace));
}
