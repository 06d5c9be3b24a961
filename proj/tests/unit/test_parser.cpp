#include "doctest.h"
#include "testkit.hpp"
#include "unitcarve/vm.hpp"

using namespace unitcarve;

namespace {

std::string parse_error(std::string_view src) {
  try {
    parse_program(src);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("record layouts are packed") {
  Program p = parse_program(R"(
record Pair { char tag; double x; int* next; char name[3]; };
int main() { return sizeof(record Pair); }
)");
  const RecordDef& pair = p.records.at("Pair");
  CHECK(pair.size == 1 + 8 + 8 + 3);
  CHECK(pair.field("x")->offset == 1);
  CHECK(pair.field("next")->offset == 9);
  CHECK(pair.field("name")->offset == 17);
  CHECK(run_system(p, {}).outcome.exit_value == 20);
}

TEST_CASE("conditionals are numbered per function in source order") {
  Program p = parse_program(R"(
int f(int x) {
  if (x > 0) { return 1; }
  while (x < 0) { x++; }
  return 0;
}
int main() {
  if (f(1)) { return 0; } else { return 1; }
}
)");
  CHECK(p.function("f").cond_count == 2);
  CHECK(p.function("main").cond_count == 1);
  CHECK(p.total_branch_arms() == 6);
  CHECK(p.function("main").callees.count(p.function_index("f")) == 1);
}

TEST_CASE("globals used by each function are recorded") {
  Program p = parse_program(R"(
int counter = 3;
double ratio = 0.5;
int bump() { counter++; return counter; }
int main() { return bump(); }
)");
  CHECK(p.function("bump").globals_used == std::set<int>{p.global_index("counter")});
  CHECK(p.function("main").globals_used.empty());
  CHECK(std::get<int64_t>(p.globals[0].init.value) == 3);
}

TEST_CASE("parse errors carry line and column") {
  CHECK(parse_error("int main() { return 0 }") == "1:23: expected ';' but found '}'");
  CHECK(parse_error("int main() {\n  return y;\n}") == "2:10: unresolved name 'y'");
  CHECK(parse_error("int f() { return 0; }").find("no function named 'main'") != std::string::npos);
  CHECK(parse_error("int main() { int x = \"s\"; return 0; }").find("cannot convert") != std::string::npos);
  CHECK(parse_error("int main() { break; return 0; }").find("outside of a loop") != std::string::npos);
  CHECK(parse_error("int f() { return 0; }\nint f() { return 1; }\nint main() { return 0; }")
            .find("duplicate definition of function 'f'") != std::string::npos);
  CHECK(parse_error("int main() { return 1 @ 2; }").find("unexpected character '@'") != std::string::npos);
  CHECK(parse_error("int main() { record Nope* p; return 0; }").find("unresolved record type") !=
        std::string::npos);
  CHECK(parse_error("int main() { /* open") .find("unterminated comment") != std::string::npos);
}

TEST_CASE("pointers convert to pointers only") {
  CHECK_NOTHROW(parse_program("int main() { int* p = malloc(8); *p = 1; return *p; }"));
  CHECK_NOTHROW(parse_program("int main() { int* p = 0; return p == NULL; }"));
  CHECK(parse_error("int main() { int* p = 5; return 0; }").find("cannot convert int to int*") !=
        std::string::npos);
  CHECK(parse_error("int main() { int* p = NULL; int x = p; return x; }").find("cannot convert int* to int") !=
        std::string::npos);
}

TEST_CASE("bundled subjects parse") {
  for (const auto& s : list_examples()) {
    CAPTURE(s.name);
    CHECK_NOTHROW(parse_program(s.source));
  }
}
