// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 when any
// fails. --seconds shortens the minute-long campaigns for local runs; the
// gate itself uses the default.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "testkit.hpp"
#include "unitcarve/campaign.hpp"
#include "unitcarve/carver.hpp"
#include "unitcarve/lifter.hpp"
#include "unitcarve/segment_map.hpp"
#include "unitcarve/vm.hpp"

using namespace unitcarve;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

CampaignConfig subject_config(const ExampleSubject& s, uint64_t rng, double seconds) {
  CampaignConfig c;
  c.subject = s.name;
  for (const auto& seed : s.seeds) c.seeds.push_back(seed.input);
  c.rng_seed = rng;
  c.time_budget_s = seconds;
  return c;
}

// ------------------------------------------------------------------ 1

Verdict running_example() {
  auto t0 = std::chrono::steady_clock::now();
  const Program& calc = testkit::subject("calc");
  SystemInput seed = testkit::stdin_input("1 + 2");
  CampaignConfig c;
  c.subject = "calc";
  c.seeds = {seed};
  c.rng_seed = 1;
  c.max_iterations = 5;
  c.time_budget_s = 4;
  CampaignArtifacts art;
  run_campaign(calc, c, &art);

  const ParameterizedUnitTest* add = nullptr;
  for (const auto& t : art.pool) {
    if (t.base.callee == "add" && t.base.input == seed) {
      add = &t;
      break;
    }
  }
  if (!add) return {false, "no add test carved from the seed"};
  const auto& ps = add->parameters;
  bool spans = ps.size() == 2 && ps[0].span == InputSpan{"stdin", 0, 1} && ps[1].span == InputSpan{"stdin", 4, 5};
  if (!spans) return {false, std::to_string(ps.size()) + " parameters, spans differ"};
  ParamBinding b = original_binding(*add);
  b.values = {std::string("337747944"), std::string("352295539")};
  std::string lifted = lift_input(seed, *add, b).stdin_text();
  double elapsed = seconds_since(t0);
  bool pass = lifted == "337747944 + 352295539" && elapsed < 5.0;
  return {pass, "2 parameters at stdin[0,1) and [4,5); lifted \"" + lifted + "\" in " + fmt("%.2f s", elapsed)};
}

// ------------------------------------------------------------------ 2

Verdict replay_fidelity() {
  int64_t checked = 0, mismatches = 0, truncated = 0;
  for (const auto& s : list_examples()) {
    const Program& p = testkit::subject(s.name);
    for (uint64_t rng = 1; rng <= 5; ++rng) {
      CampaignConfig c = subject_config(s, rng, 600);
      c.max_iterations = 20;
      CampaignArtifacts art;
      run_campaign(p, c, &art);
      for (const auto& t : art.pool) {
        if (t.base.setup_error) {
          ++truncated;
          continue;
        }
        ++checked;
        auto r = run_unit(p, t, original_binding(t));
        if (r.coverage.branches_of(t.base.callee) != t.base.footprint) {
          if (mismatches++ < 5) std::cerr << "  replay mismatch: " << s.name << " " << t.base.id << "\n";
        }
      }
    }
  }
  return {checked > 0 && mismatches == 0, std::to_string(checked) + " tests replayed, " +
                                              std::to_string(mismatches) + " mismatches (" +
                                              std::to_string(truncated) + " truncated skipped)"};
}

// ------------------------------------------------------------------ 3

SegmentId no_globals(const std::string&) { return 0; }

Verdict memgraph_round_trip() {
  RecordTable records = testkit::heap_records();
  Rng rng(0xA11CE);
  int failures = 0, budget_failures = 0, budget_cases = 0;
  size_t largest = 0;
  for (int i = 0; i < 1000; ++i) {
    Memory mem(records);
    auto heap = testkit::random_heap(mem, rng, 200);
    MemoryGraph g = snapshot(mem, heap.roots, NodeBudget::unlimited());
    largest = std::max(largest, g.nodes.size());
    Memory fresh(records);
    std::vector<SnapshotRoot> again = heap.roots;
    try {
      auto built = materialize(plan_reconstruction(g), fresh, no_globals);
      for (auto& r : again) {
        if (r.arg_index >= 0) r.value = built.args.at(static_cast<size_t>(r.arg_index));
      }
      std::string why;
      if (g.truncated || !testkit::isomorphic(g, snapshot(fresh, again, NodeBudget::unlimited()), &why)) {
        if (failures++ < 3) std::cerr << "  round trip case " << i << ": " << why << "\n";
      }
    } catch (const std::exception& e) {
      if (failures++ < 3) std::cerr << "  round trip case " << i << ": " << e.what() << "\n";
    }
    if (g.nodes.size() >= 2) {
      ++budget_cases;
      auto n = rng.between(1, static_cast<int64_t>(g.nodes.size()) - 1);
      MemoryGraph cut = snapshot(mem, heap.roots, {n, INT64_MAX});
      if (!cut.truncated || static_cast<int64_t>(cut.nodes.size()) != n) ++budget_failures;
    }
  }
  return {failures == 0 && budget_failures == 0,
          "1000 heaps (up to " + std::to_string(largest) + " nodes), " + std::to_string(failures) +
              " round-trip failures; budget law " + std::to_string(budget_cases - budget_failures) + "/" +
              std::to_string(budget_cases)};
}

// ------------------------------------------------------------------ 4

Verdict segment_algebra() {
  Rng rng(0x5E6);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    SegmentMap map;
    int n = static_cast<int>(rng.between(1, 16));
    for (int k = 0; k < n; ++k) map.add(rng.between(0, 1000), Origin::Heap);
    auto id = static_cast<SegmentId>(rng.between(1, n));
    int64_t len = map.find(id)->length;
    int64_t off = rng.between(0, len);
    int64_t d = rng.between(0, len - off);
    if (segment_lookup(map, {id, off + d}).remaining != segment_lookup(map, {id, off}).remaining - d) ++failures;
  }
  SegmentMap ten;
  SegmentId s = ten.add(10, Origin::Heap);
  bool end_ok = segment_lookup(ten, {s, 10}).remaining == 0;
  return {failures == 0 && end_ok,
          "1000 cases, " + std::to_string(failures) + " failures; offset 10 of 10 -> remaining " +
              std::to_string(segment_lookup(ten, {s, 10}).remaining)};
}

// ------------------------------------------------------------------ 5

struct FullRuns {
  std::vector<std::pair<std::string, Report>> reports;
};

Verdict zero_false_alarms(const FullRuns& runs) {
  int64_t reported = 0, reproduced = 0, unconfirmed = 0;
  std::set<std::string> found;
  for (const auto& [name, r] : runs.reports) {
    const Program& p = testkit::subject(name);
    if (static_cast<int64_t>(r.failures.size()) > r.failure_confirmed) ++unconfirmed;
    for (const auto& f : r.failures) {
      ++reported;
      auto again = run_system(p, f.input);
      if (again.outcome.is_failure() && again.outcome.trap == f.trap) ++reproduced;
      found.insert(name + ":" + f.function);
    }
  }
  std::string sites;
  for (const auto& s : found) sites += (sites.empty() ? "" : ", ") + s;
  return {reported == reproduced && unconfirmed == 0,
          std::to_string(runs.reports.size()) + " campaigns, " + std::to_string(reproduced) + "/" +
              std::to_string(reported) + " reported failures reproduce (" + sites + ")"};
}

// ------------------------------------------------------------------ 6

Verdict false_positive_filtering() {
  Program p = parse_program(R"(
int check(int n) {
  int a[4];
  return a[n];
}
int main() {
  char* in = input();
  if (strlen(in) > 0) {
    return check(2);
  }
  return 0;
}
)");
  SystemInput in = testkit::stdin_input("x2y");
  CampaignConfig c;
  c.subject = "spurious";
  c.seeds = {in};
  c.expand = 0;
  c.rng_seed = 4;
  c.focus = std::set<std::string>{"check"};
  c.max_iterations = 5;
  c.time_budget_s = 120;
  CampaignArtifacts art;
  Report r = run_campaign(p, c, &art);
  bool spurious = false;
  for (const auto& t : art.pool) {
    if (t.base.callee == "check" && t.parameters.size() == 1 && t.parameters[0].span == InputSpan{"stdin", 1, 2}) {
      spurious = true;
    }
  }
  bool pass = spurious && r.failure_candidates > 0 && r.failures.empty();
  return {pass, std::to_string(r.failure_candidates) + " unit-level failure candidates, " +
                    std::to_string(r.false_positives) + " rejected on lifting, " + std::to_string(r.failures.size()) +
                    " reported"};
}

// ------------------------------------------------------------------ 7

Verdict speedup(const FullRuns& runs) {
  double unit = 0, system = 0;
  int n = 0;
  for (const auto& [name, r] : runs.reports) {
    if (name != "calc") continue;
    auto it = r.mean_unit_ns_by_callee.find("add");
    if (it == r.mean_unit_ns_by_callee.end() || r.mean_system_ns <= 0) continue;
    unit += it->second;
    system += r.mean_system_ns;
    ++n;
  }
  if (n == 0 || unit <= 0) return {false, "no add unit executions measured"};
  double ratio = system / unit;
  return {ratio >= 10.0, "mean run_system " + fmt("%.1f us", system / n / 1e3) + ", mean run_unit(add) " +
                             fmt("%.2f us", unit / n / 1e3) + ", ratio " + fmt("%.1fx", ratio) + " (need >= 10x)"};
}

// ------------------------------------------------------------------ 8

Verdict scheduler_law() {
  // Pools of 1..6 tests over three functions; every callee assignment and
  // every invocation count / coverage pattern from a small grid. The oracle
  // scans for the lexicographic minimum of (invocations, coverage, index)
  // among eligible tests.
  const char* names[3] = {"f", "g", "h"};
  const uint64_t inv_grid[3] = {0, 1, 7};
  const double cov_grid[3] = {0.0, 0.5, 1.0};
  int64_t cases = 0, failures = 0, coverage_ties = 0;
  for (int size = 1; size <= 6; ++size) {
    int assignments = 1;
    for (int i = 0; i < size; ++i) assignments *= 3;
    for (int a = 0; a < assignments; ++a) {
      std::vector<ParameterizedUnitTest> pool(static_cast<size_t>(size));
      int code = a;
      for (int i = 0; i < size; ++i) {
        pool[static_cast<size_t>(i)].base.callee = names[code % 3];
        code /= 3;
        pool[static_cast<size_t>(i)].parameters.push_back(Parameter{});
      }
      for (int st = 0; st < 729; ++st) {
        UnitStats stats;
        int sc = st;
        for (const char* f : names) {
          stats[f] = {inv_grid[sc % 3], cov_grid[(sc / 3) % 3]};
          sc /= 9;
        }
        // knock out some tests as ineligible, differently per case
        for (int i = 0; i < size; ++i) {
          bool off = (a + st + i) % 7 == 0;
          pool[static_cast<size_t>(i)].base.setup_error = off;
        }
        std::optional<size_t> want;
        for (size_t i = 0; i < pool.size(); ++i) {
          if (pool[i].base.setup_error) continue;
          if (!want) {
            want = i;
            continue;
          }
          const auto& si = stats[pool[i].base.callee];
          const auto& sw = stats[pool[*want].base.callee];
          if (si.invocations < sw.invocations ||
              (si.invocations == sw.invocations && si.coverage_fraction < sw.coverage_fraction)) {
            want = i;
          }
        }
        auto got = select_next(pool, stats);
        ++cases;
        if (got != want) {
          ++failures;
          continue;
        }
        if (!got) continue;
        // count cases decided by the coverage tie-break
        const auto& sg = stats[pool[*got].base.callee];
        for (size_t i = 0; i < pool.size(); ++i) {
          const auto& si = stats[pool[i].base.callee];
          if (!pool[i].base.setup_error && si.invocations == sg.invocations &&
              si.coverage_fraction > sg.coverage_fraction) {
            ++coverage_ties;
            break;
          }
        }
      }
    }
  }
  return {failures == 0 && coverage_ties > 0, std::to_string(cases) + " pools, " + std::to_string(failures) +
                                                  " wrong picks, " + std::to_string(coverage_ties) +
                                                  " decided by coverage"};
}

// ------------------------------------------------------------------ 9

Verdict focus_mode(double seconds) {
  auto s = *find_example("calc");
  CampaignConfig base = subject_config(s, 11, seconds);
  base.profile = {"add"};
  Report plain = run_campaign(testkit::subject("calc"), base);
  CampaignConfig focused = base;
  focused.focus = std::set<std::string>{"add"};
  Report focus = run_campaign(testkit::subject("calc"), focused);
  auto inv = [](const Report& r) {
    auto it = r.invocations.find("add");
    return it == r.invocations.end() ? uint64_t{0} : it->second;
  };
  double ratio = inv(plain) ? double(inv(focus)) / double(inv(plain)) : 0.0;
  double time_ratio = plain.focus_ns ? double(focus.focus_ns) / double(plain.focus_ns) : 0.0;
  return {ratio >= 5.0, "add invoked " + std::to_string(inv(focus)) + " times focused vs " +
                            std::to_string(inv(plain)) + " unfocused, ratio " + fmt("%.1fx", ratio) +
                            " (time in add " + fmt("%.1fx", time_ratio) + "; need >= 5x)"};
}

// ------------------------------------------------------------------ 10

Verdict determinism(double seconds) {
  auto s = *find_example("revlines");
  CampaignConfig c = subject_config(s, 21, 600);
  c.max_iterations = 40;
  Report a = run_campaign(testkit::subject("revlines"), c);
  Report b = run_campaign(testkit::subject("revlines"), c);
  bool equal = same_deterministic(a, b);

  // Time-budgeted runs stop at different rounds; they must agree on every
  // checkpoint both reached.
  CampaignConfig timed = subject_config(*find_example("calc"), 21, seconds / 6);
  Report x = run_campaign(testkit::subject("calc"), timed);
  Report y = run_campaign(testkit::subject("calc"), timed);
  bool prefix = agree_up_to_cutoff(x, y);
  size_t shared = std::min(x.checkpoints.size(), y.checkpoints.size());
  return {equal && prefix, std::string("40-round reports ") + (equal ? "identical" : "differ") + "; timed runs (" +
                               std::to_string(x.iterations) + " and " + std::to_string(y.iterations) +
                               " rounds) agree on " + std::to_string(shared) + " shared checkpoints" +
                               (prefix ? "" : " -- MISMATCH")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  double seconds = 60;
  app.add_option("--seconds", seconds, "budget of each full-length campaign")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  auto t0 = std::chrono::steady_clock::now();
  std::vector<Verdict> v(11);
  v[1] = running_example();
  v[2] = replay_fidelity();
  v[3] = memgraph_round_trip();
  v[4] = segment_algebra();

  FullRuns runs;
  for (const auto& s : list_examples()) {
    for (uint64_t rng = 1; rng <= 5; ++rng) {
      std::cerr << "  campaign " << s.name << " rng " << rng << " (" << seconds << " s)\n";
      runs.reports.emplace_back(s.name, run_campaign(testkit::subject(s.name), subject_config(s, rng, seconds)));
    }
  }
  v[5] = zero_false_alarms(runs);
  v[6] = false_positive_filtering();
  v[7] = speedup(runs);
  v[8] = scheduler_law();
  v[9] = focus_mode(seconds);
  v[10] = determinism(seconds);

  const char* names[] = {"",
                         "running-example fidelity",
                         "replay fidelity",
                         "memory-graph round trip",
                         "segment-map algebra",
                         "zero false alarms",
                         "false-positive filtering",
                         "unit vs system speedup",
                         "scheduler law",
                         "focus mode",
                         "determinism"};
  int failed = 0;
  for (int i = 1; i <= 10; ++i) {
    std::cout << (v[i].pass ? "PASS" : "FAIL") << "  criterion " << i << " " << names[i] << ": " << v[i].detail
              << "\n";
    failed += !v[i].pass;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : std::string("all 10 criteria pass"))
            << " in " << fmt("%.0f s", seconds_since(t0)) << "\n";
  return failed ? 1 : 0;
}
