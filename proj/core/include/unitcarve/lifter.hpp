#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "unitcarve/parameterizer.hpp"
#include "unitcarve/unitfuzz.hpp"
#include "unitcarve/vm.hpp"

namespace unitcarve {

// Replaces the span of every parameter whose bound value differs from the
// original with the value's rendering. Sources are edited right to left so
// earlier offsets stay valid; parameters bound to their originals are left
// alone, so the originals binding lifts to the input itself.
SystemInput lift_input(const SystemInput& input, const ParameterizedUnitTest& test, const ParamBinding& binding);

enum class LiftClass { FailureConfirmed, CoverageConfirmed, FalsePositive };

std::string_view lift_class_name(LiftClass c);

struct LiftOptions {
  Limits limits = Limits::system();
  // Also require the trap to happen in the same function and line.
  bool strict_location = false;
  // Trace the system run (the campaign carves confirmed runs).
  bool trace = false;
  std::set<std::string> profile;
};

struct LiftOutcome {
  std::string test_id;
  int64_t exec_index = 0;
  SystemInput lifted;
  LiftClass classification = LiftClass::FalsePositive;
  BranchSet confirmed_branches;  // CoverageConfirmed
  // Set when a failure candidate trapped at system level with another kind
  // (or elsewhere, under strict_location); still a false positive.
  std::string note;
  RunResult result;
  int64_t system_ns = 0;

  bool confirmed() const { return classification != LiftClass::FalsePositive; }
};

// Runs the program on `lifted` and classifies the run against `candidate`.
// Failure candidates need a trap of the same kind; coverage candidates need
// every branch of their new-coverage set. Anything else, step-limit runs
// included, is a false positive.
LiftOutcome validate(const Program& program, const SystemInput& lifted, const Candidate& candidate,
                     const LiftOptions& options = {});

// lift_input followed by validate.
LiftOutcome lift(const Program& program, const SystemInput& input, const ParameterizedUnitTest& test,
                 const Candidate& candidate, const LiftOptions& options = {});

// Writes each confirmed lift as `lift-<n>.json` (a SystemInput document),
// plus `lift-<n>.stdin` when the input has a stdin source, and a
// `manifest.json` naming the originating unit test and binding of each.
// Returns the number of inputs written.
size_t write_lifted(const std::filesystem::path& dir, const std::vector<LiftOutcome>& outcomes,
                    const std::vector<Candidate>& candidates);

// One manifest entry per outcome, confirmed or not.
std::string lift_manifest(const std::vector<LiftOutcome>& outcomes, const std::vector<Candidate>& candidates);

}  // namespace unitcarve
