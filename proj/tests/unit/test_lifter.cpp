#include <algorithm>

#include "doctest.h"
#include "testkit.hpp"
#include "unitcarve/carver.hpp"
#include "unitcarve/lifter.hpp"
#include "unitcarve/vm.hpp"

using namespace unitcarve;

namespace {

ParameterizedUnitTest carve_one(const Program& p, const SystemInput& in, const std::string& callee) {
  RunOptions ro;
  ro.trace = true;
  auto r = run_system(p, in, {}, ro);
  CarveOptions opts;
  opts.filter = std::set<std::string>{callee};
  opts.trace_id = "t";
  return parameterize(p, carve(*r.trace, p, opts).at(0), in);
}

ParamBinding bind(const ParameterizedUnitTest& t, std::vector<ParamValue> v) {
  ParamBinding b = original_binding(t);
  b.values = std::move(v);
  return b;
}

}  // namespace

TEST_CASE("lifting the calc add test") {
  auto in = testkit::stdin_input("1 + 2");
  auto put = carve_one(testkit::subject("calc"), in, "add");
  auto lifted = lift_input(in, put, bind(put, {std::string("337747944"), std::string("352295539")}));
  CHECK(lifted.stdin_text() == "337747944 + 352295539");
  // integer bindings render the same way
  auto as_ints = lift_input(in, put, bind(put, {int64_t{337747944}, int64_t{352295539}}));
  CHECK(as_ints.stdin_text() == "337747944 + 352295539");

  auto in2 = testkit::stdin_input("10 + 20");
  auto put2 = carve_one(testkit::subject("calc"), in2, "add");
  // here the second parameter is a.len, matched inside "20"
  REQUIRE(put2.parameters.size() == 2);
  CHECK(lift_input(in2, put2, bind(put2, {std::string("7"), int64_t{2}})).stdin_text() == "7 + 20");
  CHECK(lift_input(in2, put2, bind(put2, {std::string("10"), int64_t{-9}})).stdin_text() == "10 + -90");
  CHECK(lift_input(in2, put2, bind(put2, {std::string(""), int64_t{2}})).stdin_text() == " + 20");
}

TEST_CASE("the originals binding lifts to the input itself") {
  for (const auto& s : list_examples()) {
    const Program& p = testkit::subject(s.name);
    for (const auto& seed : s.seeds) {
      RunOptions ro;
      ro.trace = true;
      auto r = run_system(p, seed.input, {}, ro);
      for (const auto& u : carve(*r.trace, p)) {
        auto put = parameterize(p, u, seed.input);
        CHECK(lift_input(seed.input, put, original_binding(put)) == seed.input);
      }
    }
  }
}

TEST_CASE("binding size must match") {
  auto in = testkit::stdin_input("1 + 2");
  auto put = carve_one(testkit::subject("calc"), in, "add");
  CHECK_THROWS_AS(lift_input(in, put, bind(put, {std::string("1")})), std::invalid_argument);
}

TEST_CASE("span replacement keeps every other byte in place (property)") {
  // Oracle: cut the source into alternating kept/replaced pieces left to
  // right and glue them back together.
  Rng rng(123);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    int64_t len = rng.between(0, 40);
    for (int64_t k = 0; k < len; ++k) text += static_cast<char>('a' + rng.below(26));
    SystemInput in = SystemInput::from_stdin(text, {"prog", "arg-" + std::to_string(i)});

    ParameterizedUnitTest put;
    std::vector<ParamValue> values;
    std::string expected;
    int64_t at = 0;
    while (at < len) {
      int64_t start = at + rng.between(0, 4);
      if (start >= len) break;
      int64_t end = std::min<int64_t>(len, start + rng.between(1, 5));
      Parameter p;
      p.slot = static_cast<int>(put.parameters.size());
      p.kind = ParamKind::String;
      p.original = text.substr(static_cast<size_t>(start), static_cast<size_t>(end - start));
      p.text = std::get<std::string>(p.original);
      p.span = {"stdin", start, end};
      bool change = rng.below(2) == 0;
      std::string repl = p.text;
      if (change) {
        repl.clear();
        for (int64_t k = rng.between(0, 6); k > 0; --k) repl += static_cast<char>('0' + rng.below(10));
        if (repl == p.text) repl += "!";
      }
      expected += text.substr(static_cast<size_t>(at), static_cast<size_t>(start - at)) + repl;
      values.emplace_back(repl);
      put.parameters.push_back(p);
      at = end;
    }
    expected += text.substr(static_cast<size_t>(std::min(at, len)));
    // hand the spans over in a scrambled order
    std::vector<Parameter> shuffled = put.parameters;
    for (size_t k = shuffled.size(); k > 1; --k) std::swap(shuffled[k - 1], shuffled[rng.below(k)]);
    put.parameters = shuffled;
    ParamBinding b;
    b.values = values;
    SystemInput out = lift_input(in, put, b);
    if (out.stdin_text() != expected || out.args() != in.args()) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("failure candidates are confirmed by a system trap of the same kind") {
  const Program& calc = testkit::subject("calc");
  auto in = testkit::stdin_input("1 + 2");
  auto put = carve_one(calc, in, "add");
  Candidate c;
  c.test_id = put.base.id;
  c.exec_index = 4;
  c.binding = bind(put, {std::string("1111111"), std::string("2")});
  c.reason = Candidate::Reason::UnitFailure;
  c.outcome = run_unit(calc, put, c.binding).outcome;
  REQUIRE(c.outcome.is_failure());

  LiftOutcome o = lift(calc, in, put, c);
  CHECK(o.lifted.stdin_text() == "1111111 + 2");
  CHECK(o.classification == LiftClass::FailureConfirmed);
  CHECK(o.result.outcome.trap == TrapKind::OutOfBounds);
  CHECK(lift_class_name(o.classification) == "failure-confirmed");

  // the lifted input fails validation before reaching add
  c.binding = bind(put, {std::string("1x111111"), std::string("2")});
  c.outcome = run_unit(calc, put, c.binding).outcome;
  REQUIRE(c.outcome.is_failure());
  LiftOutcome fp = lift(calc, in, put, c);
  CHECK(fp.classification == LiftClass::FalsePositive);
  CHECK(fp.result.output == "error\n");
}

TEST_CASE("coverage candidates need every new arm at system level") {
  const Program& calc = testkit::subject("calc");
  auto in = testkit::stdin_input("1 + 2");
  auto put = carve_one(calc, in, "add");
  Candidate c;
  c.test_id = put.base.id;
  c.reason = Candidate::Reason::NewCoverage;
  c.binding = bind(put, {std::string("15"), std::string("2")});
  // add#2 is `if (i < la)` and 15 has more digits than 2
  auto unit = run_unit(calc, put, c.binding);
  c.outcome = unit.outcome;
  c.new_branches = unit.coverage.new_relative_to(run_system(calc, in).coverage);
  REQUIRE_FALSE(c.new_branches.empty());
  LiftOutcome o = lift(calc, in, put, c);
  CHECK(o.classification == LiftClass::CoverageConfirmed);
  CHECK(o.confirmed_branches == c.new_branches);

  c.new_branches.insert({"add", 99, Arm::Then});
  CHECK(lift(calc, in, put, c).classification == LiftClass::FalsePositive);
}

TEST_CASE("strict location") {
  Program p = parse_program(R"(
int check(int n) {
  int a[4];
  return a[n];
}
int main() {
  char* in = input();
  int n = atoi(in);
  int b[4];
  if (n > 100) {
    return b[n];
  }
  return check(n);
}
)");
  auto in = testkit::stdin_input("2");
  auto put = carve_one(p, in, "check");
  REQUIRE(put.parameters.size() == 1);
  Candidate c;
  c.reason = Candidate::Reason::UnitFailure;
  c.binding = bind(put, {int64_t{500}});
  c.outcome = run_unit(p, put, c.binding).outcome;
  REQUIRE(c.outcome.is_failure());
  // the system traps too, but in main
  CHECK(lift(p, in, put, c).classification == LiftClass::FailureConfirmed);
  LiftOptions strict;
  strict.strict_location = true;
  LiftOutcome o = lift(p, in, put, c, strict);
  CHECK(o.classification == LiftClass::FalsePositive);
  CHECK_FALSE(o.note.empty());
}
