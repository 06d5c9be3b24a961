#include "doctest.h"
#include "testkit.hpp"
#include "unitcarve/vm.hpp"

using namespace unitcarve;

TEST_CASE("three bundled subjects") {
  auto all = list_examples();
  REQUIRE(all.size() == 3);
  CHECK(all[0].name == "calc");
  CHECK(all[1].name == "fields");
  CHECK(all[2].name == "revlines");
  CHECK(find_example("fields").has_value());
  CHECK_FALSE(find_example("nope").has_value());
  for (const auto& s : all) CHECK(s.source == testkit::read_file(testkit::subject_path(s.name)));
}

TEST_CASE("seeds run cleanly and drive at least three functions") {
  for (const auto& s : list_examples()) {
    const Program& p = testkit::subject(s.name);
    REQUIRE(s.seeds.size() >= 3);
    for (const auto& seed : s.seeds) {
      CAPTURE(s.name);
      CAPTURE(seed.name);
      auto r = run_system(p, seed.input);
      CHECK(r.outcome.kind == Outcome::Kind::Ok);
      CHECK(r.invocations.size() >= 3);
    }
  }
}

TEST_CASE("every planted defect is reachable with its example input") {
  for (const auto& s : list_examples()) {
    REQUIRE_FALSE(s.defects.empty());
    const Program& p = testkit::subject(s.name);
    for (const auto& d : s.defects) {
      CAPTURE(s.name);
      auto r = run_system(p, d.example);
      REQUIRE(r.outcome.kind == Outcome::Kind::Trap);
      CHECK(r.outcome.trap == d.trap);
      // the location column starts with the function name
      CHECK(d.location.rfind("`" + r.outcome.function + "`", 0) == 0);
    }
  }
}

TEST_CASE("defect tables parse C escapes") {
  auto d = parse_defects(
      "| location | trigger | example input | trap |\n"
      "|---|---|---|---|\n"
      "| `f` | x | `a\\tb\\n\\\\` | null-deref |\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].example.stdin_text() == "a\tb\n\\");
  CHECK(d[0].trap == TrapKind::NullDeref);
}

TEST_CASE("revlines and fields produce their documented output") {
  CHECK(run_system(testkit::subject("revlines"), testkit::stdin_input("a\nb\nc\n")).output == "c\nb\na\n");
  CHECK(run_system(testkit::subject("revlines"), testkit::stdin_input("")).output == "empty\n");
  auto f = run_system(testkit::subject("fields"), testkit::stdin_input("2\nname,age\nada,36\n"));
  CHECK(f.outcome.kind == Outcome::Kind::Ok);
  CHECK(f.output == "age\n36\n");
}
