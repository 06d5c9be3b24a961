#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "unitcarve/coverage.hpp"
#include "unitcarve/memgraph.hpp"
#include "unitcarve/outcome.hpp"
#include "unitcarve/program.hpp"
#include "unitcarve/system_input.hpp"
#include "unitcarve/trace.hpp"

namespace unitcarve {

struct Limits {
  int64_t max_steps = 5'000'000;  // statements plus loop conditions
  int max_call_depth = 400;
  NodeBudget node_budget;

  static Limits system() { return {}; }
  static Limits unit() { return {1'000'000, 400, {}}; }
};

struct RunOptions {
  bool trace = false;
  // Functions whose inclusive wall time is accumulated into RunResult::profile_ns.
  std::set<std::string> profile;
};

struct RunResult {
  Outcome outcome;
  CoverageMap coverage;
  std::string output;
  std::optional<Trace> trace;
  int64_t steps = 0;
  std::map<std::string, uint64_t> invocations;  // functions entered at least once
  int64_t profile_ns = 0;
};

// Executes `main` with input()/arg()/argc() wired to `input`.
RunResult run_system(const Program& program, const SystemInput& input, const Limits& limits = {},
                     const RunOptions& options = {});

// Fresh VM: globals take their initializers, `plan` rebuilds the recorded
// context, then `callee` is called with the bound arguments. Setup problems
// (truncated plan, bad steps) produce a SetupError outcome.
RunResult run_unit(const Program& program, const std::string& callee, const SetupPlan& plan,
                   const SystemInput& input, const Limits& limits = Limits::unit(),
                   const RunOptions& options = {});

// Per-global one-root graphs holding each global's initializer, as seen by
// the first event of any trace.
std::map<std::string, MemoryGraph> initial_globals(const Program& program);

}  // namespace unitcarve
