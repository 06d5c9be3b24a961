#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "unitcarve/lifter.hpp"
#include "unitcarve/parameterizer.hpp"
#include "unitcarve/rng.hpp"
#include "unitcarve/unitfuzz.hpp"
#include "unitcarve/vm.hpp"

namespace unitcarve {

// Byte-level variant of `seed`: one to four edits drawn from bit flip,
// insert, delete, duplicate and overwrite. Empty inputs only get inserts.
std::string mutate_bytes(const std::string& seed, Rng& rng);

// `n` variants per seed (every source of the seed is mutated), in seed order.
std::vector<SystemInput> seed_expand(const std::vector<SystemInput>& seeds, int n, Rng& rng);

struct FunctionStats {
  uint64_t invocations = 0;        // unit executions with this function as callee
  double coverage_fraction = 0.0;  // of its arms, under all system tests so far
};

using UnitStats = std::map<std::string, FunctionStats>;

// Covered arms of `function` over its total; 1.0 for a function without
// conditionals (nothing left to find there).
double coverage_fraction(const Program& program, const CoverageMap& coverage, std::string_view function);

// Eligible: has parameters, no setup error, callee in `focus` when given.
bool eligible(const ParameterizedUnitTest& test, const std::optional<std::set<std::string>>& focus);

// Index of the next test to fuzz: fewest invocations of its callee, then
// lowest coverage fraction, then fewest earlier selections of the test
// itself (`fuzz_counts`, by index; may be empty), then carve order.
std::optional<size_t> select_next(const std::vector<ParameterizedUnitTest>& units, const UnitStats& stats,
                                  const std::optional<std::set<std::string>>& focus = std::nullopt,
                                  const std::vector<uint64_t>& fuzz_counts = {});

struct CampaignConfig {
  std::string subject;  // name shown in reports
  std::vector<SystemInput> seeds;
  double time_budget_s = 900.0;
  int64_t fuzz_budget = 100;  // executions per selected test
  uint64_t rng_seed = 0;
  int expand = 10;  // variants per seed
  std::optional<std::set<std::string>> focus;
  // Functions whose inclusive time is measured; defaults to the focus set.
  std::set<std::string> profile;
  Limits system_limits = Limits::system();
  Limits unit_limits = Limits::unit();
  int workers = 1;
  // Stop after this many select/fuzz/lift rounds (0: time budget only).
  int64_t max_iterations = 0;
  // Failure candidates lifted per unit-level trap site in one round; the
  // rest, and any candidate at a site already confirmed, are counted but
  // not re-run.
  int failure_lifts_per_site = 3;
  bool strict_location = false;
};

struct ReportedFailure {
  TrapKind trap = TrapKind::OutOfBounds;
  std::string function;
  int line = 0;
  std::string detail;
  SystemInput input;
  std::string test_id;
  ParamBinding binding;
  int64_t iteration = 0;
  uint64_t hits = 0;  // confirmed lifts with this signature
};

struct Report {
  // Deterministic part: a pure function of (program, config) up to the
  // iteration cutoff.
  std::string subject;
  uint64_t rng_seed = 0;
  int64_t fuzz_budget = 0;
  std::vector<std::string> focus;
  int64_t iterations = 0;
  bool phase_one_complete = true;  // every expanded seed ran before the deadline
  int64_t seed_tests = 0;
  int64_t system_tests = 0;  // seeds, expansions and confirmed lifts
  int64_t total_arms = 0;
  int64_t covered_arms = 0;  // under system tests
  std::vector<std::string> functions_reached;       // by system tests
  std::vector<std::string> unit_functions_reached;  // by unit executions
  int64_t unit_tests = 0;      // carved
  int64_t eligible_tests = 0;  // parameterized, no setup error, in focus
  int64_t setup_errors = 0;
  int64_t tests_fuzzed = 0;  // distinct tests selected at least once
  int64_t unit_executions = 0;
  int64_t system_executions = 0;
  int64_t failure_candidates = 0;
  int64_t coverage_candidates = 0;
  int64_t lifts_attempted = 0;
  int64_t failure_confirmed = 0;
  int64_t coverage_confirmed = 0;
  int64_t false_positives = 0;
  int64_t other_trap_lifts = 0;  // false positives that trapped differently
  int64_t lifts_skipped = 0;     // over the per-site cap or at a confirmed site
  std::vector<ReportedFailure> failures;  // one per (trap, function, line)
  std::map<std::string, uint64_t> invocations;       // unit and system runs
  std::map<std::string, uint64_t> unit_invocations;  // unit runs only
  std::map<std::string, uint64_t> fuzz_executions;   // by callee
  // Unit-level trap sites ("kind@function:line") whose lifts were rejected.
  std::map<std::string, uint64_t> rejected_sites;
  std::vector<std::string> diagnostics;
  // Running digest of every finished round, recorded every 10 rounds; two
  // reports agree up to a cutoff when their shared checkpoints agree.
  std::vector<std::string> checkpoints;

  // Timing part: wall clock, differs run to run.
  double elapsed_s = 0;
  double mean_unit_ns = 0;
  double mean_system_ns = 0;
  std::map<std::string, double> mean_unit_ns_by_callee;
  int64_t focus_ns = 0;  // inclusive time in the profiled functions
  int64_t unit_ns = 0;
  int64_t system_ns = 0;
  std::string started;  // ISO-8601 UTC

  double branch_coverage() const { return total_arms ? double(covered_arms) / double(total_arms) : 0.0; }
  double speedup() const { return mean_unit_ns > 0 ? mean_system_ns / mean_unit_ns : 0.0; }
  double percent_lifted() const {
    return lifts_attempted ? 100.0 * double(failure_confirmed + coverage_confirmed) / double(lifts_attempted) : 0.0;
  }
};

struct SystemTestRecord {
  enum class Origin { Seed, Expanded, Lifted };
  Origin origin = Origin::Seed;
  SystemInput input;
  Outcome outcome;
};

// Everything the campaign built, for callers that look past the report.
struct CampaignArtifacts {
  std::vector<SystemTestRecord> system_tests;
  std::vector<ParameterizedUnitTest> pool;  // carve order
  std::vector<LiftOutcome> lifts;           // confirmed only
  CoverageMap system_coverage;
};

// Seeds and their expansions run as traced system tests and are carved;
// then rounds of select, fuzz and lift run until the time budget (or
// max_iterations) is spent. Confirmed lifts are carved into the pool and
// their coverage counts from the next selection on. Component errors land
// in Report::diagnostics.
Report run_campaign(const Program& program, const CampaignConfig& config, CampaignArtifacts* artifacts = nullptr);

std::string report_to_json(const Report& report);
Report report_from_json(std::string_view text);
// Plain-text tables: execution times, lifted tests, coverage, functions
// reached, focus functions.
std::string render_table(const Report& report);
// Deterministic parts equal.
bool same_deterministic(const Report& a, const Report& b);
// Checkpoints agree over the shorter list and it is non-empty.
bool agree_up_to_cutoff(const Report& a, const Report& b);

}  // namespace unitcarve
