#include "doctest.h"
#include "testkit.hpp"
#include "unitcarve/trace.hpp"
#include "unitcarve/vm.hpp"

using namespace unitcarve;

namespace {

const std::string kGolden = std::string(UNITCARVE_TEST_DATA) + "/traces/calc_1_plus_2.jsonl";

Trace traced(const Program& p, const SystemInput& in) {
  RunOptions opts;
  opts.trace = true;
  return *run_system(p, in, {}, opts).trace;
}

}  // namespace

TEST_CASE("calc on \"1 + 2\" matches the frozen trace") {
  std::string golden = testkit::read_file(kGolden);
  Trace t = traced(testkit::subject("calc"), testkit::stdin_input("1 + 2"));
  CHECK(serialize_trace(t) == golden);
}

TEST_CASE("trace shape") {
  Trace t = deserialize_trace(testkit::read_file(kGolden));
  REQUIRE_FALSE(t.calls.empty());
  CHECK(t.calls.front().callee == "main");
  CHECK(t.calls.front().seq == 1);
  auto adds = t.calls_to("add");
  REQUIRE(adds.size() == 1);
  const CallEvent& add = *adds.front();
  CHECK(add.completed);
  CHECK(add.graph.roots[0].name == "arg0");
  CHECK(add.graph.roots[1].name == "arg1");
  CHECK(t.find_call(add.seq) == &add);
  for (size_t i = 1; i < t.calls.size(); ++i) CHECK(t.calls[i - 1].seq < t.calls[i].seq);
  REQUIRE(t.end.has_value());
  CHECK(t.end->output == "3\n");
  CHECK(t.end->input.stdin_text() == "1 + 2");
  CHECK(t.end->outcome.kind == Outcome::Kind::Ok);
}

TEST_CASE("serialize and deserialize round trip") {
  for (const auto& s : list_examples()) {
    const Program& p = testkit::subject(s.name);
    for (const auto& seed : s.seeds) {
      CAPTURE(seed.name);
      std::string text = serialize_trace(traced(p, seed.input));
      CHECK(serialize_trace(deserialize_trace(text)) == text);
    }
  }
}

TEST_CASE("malformed traces name the offending line") {
  std::string golden = testkit::read_file(kGolden);
  auto first_line_end = golden.find('\n');
  auto error_line = [](const std::string& text) -> size_t {
    try {
      deserialize_trace(text);
    } catch (const TraceFormatError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(error_line(golden.substr(0, first_line_end + 1) + "{not json\n") == 2);
  CHECK(error_line("{\"kind\":\"mystery\",\"seq\":1}\n") == 1);
  CHECK(error_line("{\"kind\":\"call\",\"seq\":1}\n") == 1);
  // an end record that is not last
  std::string end_line = golden.substr(golden.rfind('\n', golden.size() - 2) + 1);
  CHECK(error_line(end_line + golden.substr(0, first_line_end + 1)) == 2);
}

// Folding replays stores attributed to a global's root; a store through an
// alias of another global's storage is only seen by the call-time snapshot.
TEST_CASE("folding global updates agrees with the globals in each call") {
  const char* src = R"(
record Box { int n; char* s; };
int total = 0;
record Box* box = NULL;
char name[8] = "ab";
int bump(int d) { total = total + d; return total; }
void fill() {
  box = malloc(sizeof(record Box));
  box->n = 5;
  box->s = malloc(3);
  box->s[0] = 'q';
  name[1] = 'z';
}
int peek() { if (box != NULL) { return box->n; } return -1; }
int main() {
  bump(2);
  peek();
  fill();
  bump(3);
  box->n = 9;
  total++;
  return peek() + bump(1);
}
)";
  Program p = parse_program(src);
  Trace t = traced(p, {});
  CHECK_FALSE(t.globals.empty());
  auto initial = initial_globals(p);
  int checked = 0;
  for (const auto& call : t.calls) {
    auto folded = fold_globals(initial, t.globals, call.seq);
    auto split = split_globals(call.graph);
    REQUIRE(folded.size() == split.size());
    for (const auto& [name, g] : split) {
      std::string why;
      CAPTURE(call.seq);
      CAPTURE(name);
      CHECK_MESSAGE(testkit::isomorphic(g, folded.at(name), &why), why);
      ++checked;
    }
  }
  CHECK(checked == static_cast<int>(t.calls.size()) * 3);
}

TEST_CASE("folding agrees on the bundled subjects") {
  for (const auto& s : list_examples()) {
    const Program& p = testkit::subject(s.name);
    auto initial = initial_globals(p);
    for (const auto& seed : s.seeds) {
      Trace t = traced(p, seed.input);
      for (const auto& call : t.calls) {
        auto folded = fold_globals(initial, t.globals, call.seq);
        for (const auto& [name, g] : split_globals(call.graph)) {
          CHECK(testkit::isomorphic(g, folded.at(name)));
        }
      }
    }
  }
}

TEST_CASE("restrict_roots keeps only what the kept roots reach") {
  Trace t = deserialize_trace(testkit::read_file(kGolden));
  const CallEvent& add = *t.calls_to("add").front();
  MemoryGraph g = restrict_roots(add.graph, {"arg1"});
  REQUIRE(g.roots.size() == 1);
  CHECK(g.roots[0].name == "arg1");
  REQUIRE(g.roots[0].value.kind == RootValue::Kind::Ref);
  CHECK(g.roots[0].value.node == 1);
  CHECK(g.nodes.size() < add.graph.nodes.size());
}
