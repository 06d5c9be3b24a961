#include "doctest.h"
#include "testkit.hpp"
#include "unitcarve/carver.hpp"
#include "unitcarve/vm.hpp"

using namespace unitcarve;

namespace {

std::vector<UnitTest> carve_run(const Program& p, const SystemInput& in, CarveOptions opts = {}) {
  RunOptions ro;
  ro.trace = true;
  auto r = run_system(p, in, {}, ro);
  if (opts.trace_id.empty()) opts.trace_id = "t";
  return carve(*r.trace, p, opts);
}

}  // namespace

TEST_CASE("one unit test per call, in call order") {
  const Program& calc = testkit::subject("calc");
  auto units = carve_run(calc, testkit::stdin_input("1 + 2"));
  RunOptions ro;
  ro.trace = true;
  auto trace = *run_system(calc, testkit::stdin_input("1 + 2"), {}, ro).trace;
  REQUIRE(units.size() == trace.calls.size());
  for (size_t i = 0; i < units.size(); ++i) {
    CHECK(units[i].seq == trace.calls[i].seq);
    CHECK(units[i].callee == trace.calls[i].callee);
    CHECK(units[i].id == "t:" + units[i].callee + "@" + std::to_string(units[i].seq));
  }
}

TEST_CASE("function filter") {
  CarveOptions opts;
  opts.filter = std::set<std::string>{"add"};
  auto units = carve_run(testkit::subject("calc"), testkit::stdin_input("1 + 2"), opts);
  REQUIRE(units.size() == 1);
  const UnitTest& add = units[0];
  CHECK(add.callee == "add");
  CHECK(add.completed);
  CHECK_FALSE(add.setup_error);
  CHECK(add.reachable_globals.empty());
  REQUIRE(add.recorded_args.size() == 2);
  // two Num records, each with its digit string
  CHECK(add.graph.nodes.size() == 4);
}

TEST_CASE("context holds the arguments and the globals the callee can reach") {
  const Program& calc = testkit::subject("calc");
  CHECK(reachable_functions(calc, "add") == std::set<std::string>{"add", "strip_zeros"});
  CHECK(reachable_functions(calc, "read_num") ==
        std::set<std::string>{"read_num", "skip_spaces", "is_digit", "make_num"});
  CHECK(reachable_globals(calc, "warm_up") == std::set<std::string>{"warmup_rounds"});
  CHECK(reachable_globals(calc, "main") == std::set<std::string>{"warmup_rounds"});
  CHECK(reachable_globals(calc, "add").empty());

  CarveOptions opts;
  opts.filter = std::set<std::string>{"warm_up"};
  auto units = carve_run(calc, testkit::stdin_input("1 + 2"), opts);
  REQUIRE(units.size() == 1);
  CHECK(units[0].reachable_globals == std::vector<std::string>{"warmup_rounds"});
  REQUIRE(units[0].graph.roots.size() == 1);
  CHECK(units[0].graph.roots[0].name == "warmup_rounds");
}

TEST_CASE("replay reproduces the recorded footprint on every seed") {
  int replayed = 0;
  int mismatches = 0;
  for (const auto& s : list_examples()) {
    const Program& p = testkit::subject(s.name);
    for (const auto& seed : s.seeds) {
      for (const auto& u : carve_run(p, seed.input)) {
        if (u.setup_error) continue;
        auto r = replay(p, u);
        ++replayed;
        if (r.coverage.branches_of(u.callee) != u.footprint) {
          ++mismatches;
          MESSAGE("footprint mismatch: " << u.id << " of " << s.name << "/" << seed.name);
        }
      }
    }
  }
  CHECK(replayed > 100);
  CHECK(mismatches == 0);
}

TEST_CASE("a replayed trapping call traps the same way") {
  CarveOptions opts;
  opts.filter = std::set<std::string>{"add"};
  auto units = carve_run(testkit::subject("calc"), testkit::stdin_input("1111111 + 2"), opts);
  REQUIRE(units.size() == 1);
  CHECK_FALSE(units[0].completed);
  auto r = replay(testkit::subject("calc"), units[0]);
  REQUIRE(r.outcome.kind == Outcome::Kind::Trap);
  CHECK(r.outcome.trap == TrapKind::OutOfBounds);
  CHECK(r.outcome.function == "add");
}

TEST_CASE("truncated contexts are flagged and refuse to run") {
  Program p = parse_program(R"(
record Item { int v; record Item* next; };
int len(record Item* it) {
  int n = 0;
  while (it != NULL) { n++; it = it->next; }
  return n;
}
int main() {
  record Item* head = NULL;
  int i = 0;
  while (i < 5000) {
    record Item* it = malloc(sizeof(record Item));
    it->next = head;
    head = it;
    i++;
  }
  return len(head);
}
)");
  CarveOptions opts;
  opts.filter = std::set<std::string>{"len"};
  auto units = carve_run(p, {}, opts);
  REQUIRE(units.size() == 1);
  CHECK(units[0].setup_error);
  CHECK(units[0].plan.truncated);
  CHECK(replay(p, units[0]).outcome.kind == Outcome::Kind::SetupError);
}

TEST_CASE("terminated variant cuts char nodes at the first zero") {
  MemoryGraph g;
  GraphNode text;
  text.id = 1;
  text.type = MiniType::char_type();
  text.length = 6;
  text.bytes = {'a', 'b', 0, 'x', 'y', 0};
  g.nodes.push_back(text);
  g.roots.push_back({"arg0", 0, MiniType::pointer_to(MiniType::char_type()), RootValue::ref(1, 0)});
  bool changed = false;
  MemoryGraph cut = terminated_variant(g, &changed);
  CHECK(changed);
  CHECK(cut.node(1).length == 3);
  CHECK(cut.node(1).bytes == std::vector<uint8_t>{'a', 'b', 0});

  // a pointer past the cut pins the full length
  g.roots[0].value = RootValue::ref(1, 4);
  MemoryGraph kept = terminated_variant(g, &changed);
  CHECK_FALSE(changed);
  CHECK(kept.node(1).length == 6);
}

TEST_CASE("unit files round trip") {
  auto units = carve_run(testkit::subject("revlines"), testkit::stdin_input("one\ntwo\n"));
  std::string text = serialize_units(units);
  auto back = deserialize_units(text);
  REQUIRE(back.size() == units.size());
  CHECK(serialize_units(back) == text);
  for (size_t i = 0; i < units.size(); ++i) {
    CHECK(back[i].footprint == units[i].footprint);
    CHECK(testkit::isomorphic(back[i].graph, units[i].graph));
  }
}
