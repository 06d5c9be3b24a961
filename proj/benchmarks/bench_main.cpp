// System runs against carved unit runs of the same calc computation, plus
// the raw cost of snapshotting and rebuilding a context.

#include <benchmark/benchmark.h>

#include "unitcarve/carver.hpp"
#include "unitcarve/parameterizer.hpp"
#include "unitcarve/subjects.hpp"
#include "unitcarve/vm.hpp"

using namespace unitcarve;

namespace {

const Program& calc() {
  static const Program p = parse_program(find_example("calc")->source);
  return p;
}

const SystemInput& one_plus_two() {
  static const SystemInput in = SystemInput::from_stdin("1 + 2");
  return in;
}

const ParameterizedUnitTest& carved(const std::string& callee) {
  static std::map<std::string, ParameterizedUnitTest> cache;
  auto it = cache.find(callee);
  if (it != cache.end()) return it->second;
  RunOptions ro;
  ro.trace = true;
  auto r = run_system(calc(), one_plus_two(), {}, ro);
  CarveOptions co;
  co.filter = std::set<std::string>{callee};
  auto units = carve(*r.trace, calc(), co);
  return cache.emplace(callee, parameterize(calc(), units.at(0), one_plus_two())).first->second;
}

void BM_run_system(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_system(calc(), one_plus_two()));
}
BENCHMARK(BM_run_system)->Unit(benchmark::kMicrosecond);

void BM_run_system_traced(benchmark::State& state) {
  RunOptions ro;
  ro.trace = true;
  for (auto _ : state) benchmark::DoNotOptimize(run_system(calc(), one_plus_two(), {}, ro));
}
BENCHMARK(BM_run_system_traced)->Unit(benchmark::kMicrosecond);

void BM_run_unit(benchmark::State& state, const char* callee) {
  const auto& t = carved(callee);
  ParamBinding b = original_binding(t);
  for (auto _ : state) benchmark::DoNotOptimize(run_unit(calc(), t, b));
}
BENCHMARK_CAPTURE(BM_run_unit, add, "add")->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_run_unit, read_num, "read_num")->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_run_unit, validate, "validate")->Unit(benchmark::kMicrosecond);

// A linked list of `n` 16-byte records.
void BM_snapshot_list(benchmark::State& state) {
  RecordTable records;
  auto item = MiniType::record_named("Item");
  auto item_ptr = MiniType::pointer_to(item);
  records.add({"Item", {{"value", MiniType::int_type(), 0}, {"next", item_ptr, 8}}, 16});
  Memory mem(records);
  SegmentId head = 0;
  for (int64_t i = 0; i < state.range(0); ++i) {
    SegmentId s = mem.allocate(16, Origin::Heap, item);
    mem.store({s, 8}, *item_ptr, Value::of_pointer({head, 0}));
    head = s;
  }
  std::vector<SnapshotRoot> roots{{"arg0", 0, item_ptr, Value::of_pointer({head, 0})}};
  for (auto _ : state) benchmark::DoNotOptimize(snapshot(mem, roots, NodeBudget::unlimited()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_snapshot_list)->Arg(16)->Arg(256)->Arg(4096);

void BM_plan_and_materialize(benchmark::State& state) {
  const auto& t = carved("add");
  for (auto _ : state) {
    Memory mem(calc().records);
    SetupPlan plan = plan_reconstruction(t.base.graph);
    benchmark::DoNotOptimize(materialize(plan, mem, [](const std::string&) { return SegmentId{0}; }));
  }
}
BENCHMARK(BM_plan_and_materialize);

}  // namespace
BENCHMARK_MAIN();
