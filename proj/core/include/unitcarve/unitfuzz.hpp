#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "unitcarve/coverage.hpp"
#include "unitcarve/parameterizer.hpp"
#include "unitcarve/rng.hpp"
#include "unitcarve/vm.hpp"

namespace unitcarve {

enum class IntStrategy { BitFlip, Random, Zero, Max, Min };
enum class DoubleStrategy { BitFlip, Random, Zero, Max, NegMax };
enum class StringStrategy { BitFlip, RandomBytes, RandomAscii, AllZero, AllFF, Repeat };

std::string_view strategy_name(IntStrategy s);
std::string_view strategy_name(DoubleStrategy s);
std::string_view strategy_name(StringStrategy s);

constexpr size_t kMaxRandomString = 64;

// Strategy drawn uniformly from the catalog, then applied.
int64_t mutate_int(int64_t v, Rng& rng, IntStrategy* chosen = nullptr);
double mutate_double(double v, Rng& rng, DoubleStrategy* chosen = nullptr);
// Bit flips and repeats need a non-empty original and are left out otherwise.
std::string mutate_string(const std::string& v, Rng& rng, StringStrategy* chosen = nullptr);

int64_t apply_strategy(IntStrategy s, int64_t v, Rng& rng);
double apply_strategy(DoubleStrategy s, double v, Rng& rng);
std::string apply_strategy(StringStrategy s, const std::string& v, Rng& rng);

int64_t flip_bit(int64_t v, int bit);
double flip_bit(double v, int bit);
// v with v[start, start+len) repeated `times` times in place.
std::string repeat_substring(const std::string& v, size_t start, size_t len, int times);

// Binding for execution `index` of a fuzz run: index 0 is the originals,
// later ones mutate every parameter independently.
ParamBinding generate_binding(const ParameterizedUnitTest& test, uint64_t seed, int64_t index);

struct Candidate {
  enum class Reason { UnitFailure, NewCoverage };

  std::string test_id;
  int64_t exec_index = 0;
  ParamBinding binding;
  Reason reason = Reason::NewCoverage;
  Outcome outcome;        // unit outcome; carries the trap kind for failures
  BranchSet new_branches;  // NewCoverage: arms absent from `covered`
};

struct FuzzStats {
  int64_t executions = 0;
  int64_t failures = 0;
  int64_t coverage_candidates = 0;
  int64_t step_limits = 0;
  int64_t unit_ns = 0;  // summed wall time of the executions
  bool aborted = false;
  std::string diagnostic;
};

struct FuzzConfig {
  int64_t budget = 100;
  uint64_t seed = 0;
  int workers = 1;
  Limits limits = Limits::unit();
  std::set<std::string> profile;
  // Polled between executions (between batches with several workers).
  std::function<bool()> should_stop;
};

struct FuzzResult {
  std::vector<Candidate> candidates;
  FuzzStats stats;
  CoverageMap coverage;  // merged over every execution
  std::map<std::string, uint64_t> invocations;
  int64_t profile_ns = 0;
};

// Runs up to `budget` bindings. A run is a candidate when it fails or covers
// an arm that neither `covered` nor an earlier run of this call has covered;
// the originals run is never a candidate. Results depend only on (test,
// budget, seed), not on the worker count.
FuzzResult fuzz_unit(const Program& program, const ParameterizedUnitTest& test, const CoverageMap& covered,
                     const FuzzConfig& config);

// `*.cand.jsonl`: the tests first, then one candidate per line.
std::string serialize_candidates(const std::vector<ParameterizedUnitTest>& tests,
                                 const std::vector<Candidate>& candidates);
void deserialize_candidates(std::string_view text, std::vector<ParameterizedUnitTest>& tests,
                            std::vector<Candidate>& candidates);

}  // namespace unitcarve
