#include "unitcarve/lifter.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>

#include "codec.hpp"

namespace unitcarve {

using codec::json;

SystemInput lift_input(const SystemInput& input, const ParameterizedUnitTest& test, const ParamBinding& binding) {
  if (binding.values.size() != test.parameters.size()) {
    throw std::invalid_argument("binding has " + std::to_string(binding.values.size()) + " values for " +
                                std::to_string(test.parameters.size()) + " parameters");
  }
  std::map<std::string, std::vector<const Parameter*>> by_source;
  for (const auto& p : test.parameters) {
    if (!same_value(binding.values[static_cast<size_t>(p.slot)], p.original)) by_source[p.span.source].push_back(&p);
  }
  SystemInput out = input;
  for (auto& [source, params] : by_source) {
    InputSource* src = out.find(source);
    if (!src) continue;
    std::sort(params.begin(), params.end(),
              [](const Parameter* a, const Parameter* b) { return a->span.start > b->span.start; });
    for (const Parameter* p : params) {
      auto start = static_cast<size_t>(p->span.start);
      auto end = static_cast<size_t>(p->span.end);
      if (end > src->content.size() || start > end) continue;
      src->content.replace(start, end - start, render(binding.values[static_cast<size_t>(p->slot)]));
    }
  }
  return out;
}

std::string_view lift_class_name(LiftClass c) {
  switch (c) {
    case LiftClass::FailureConfirmed:
      return "failure-confirmed";
    case LiftClass::CoverageConfirmed:
      return "coverage-confirmed";
    case LiftClass::FalsePositive:
      return "false-positive";
  }
  return "?";
}

LiftOutcome validate(const Program& program, const SystemInput& lifted, const Candidate& candidate,
                     const LiftOptions& options) {
  LiftOutcome out;
  out.test_id = candidate.test_id;
  out.exec_index = candidate.exec_index;
  out.lifted = lifted;
  RunOptions run_options;
  run_options.trace = options.trace;
  run_options.profile = options.profile;
  auto t0 = std::chrono::steady_clock::now();
  out.result = run_system(program, lifted, options.limits, run_options);
  out.system_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();

  const Outcome& sys = out.result.outcome;
  if (candidate.reason == Candidate::Reason::UnitFailure) {
    if (!sys.is_failure()) return out;
    const Outcome& unit = candidate.outcome;
    bool same_kind = sys.trap == unit.trap;
    bool same_place = sys.function == unit.function && sys.line == unit.line;
    if (same_kind && (!options.strict_location || same_place)) {
      out.classification = LiftClass::FailureConfirmed;
    } else {
      out.note = "system run ended in " + describe(sys) + " at " + sys.function + ":" + std::to_string(sys.line) +
                 ", unit run in " + describe(unit) + " at " + unit.function + ":" + std::to_string(unit.line);
    }
    return out;
  }
  if (sys.kind == Outcome::Kind::StepLimit || sys.kind == Outcome::Kind::SetupError) return out;
  for (const auto& b : candidate.new_branches) {
    if (!out.result.coverage.covers(b)) return out;
  }
  out.classification = LiftClass::CoverageConfirmed;
  out.confirmed_branches = candidate.new_branches;
  return out;
}

LiftOutcome lift(const Program& program, const SystemInput& input, const ParameterizedUnitTest& test,
                 const Candidate& candidate, const LiftOptions& options) {
  return validate(program, lift_input(input, test, candidate.binding), candidate, options);
}

namespace {

json manifest_entry(const LiftOutcome& o, const Candidate* c) {
  json j = {{"test_id", o.test_id},
            {"exec", o.exec_index},
            {"classification", lift_class_name(o.classification)},
            {"system_outcome", codec::encode(o.result.outcome)},
            {"input", codec::encode(o.lifted)}};
  if (c) {
    j["binding"] = codec::encode(c->binding);
    j["unit_outcome"] = codec::encode(c->outcome);
  }
  if (o.classification == LiftClass::CoverageConfirmed) j["branches"] = codec::encode(o.confirmed_branches);
  if (!o.note.empty()) j["note"] = o.note;
  return j;
}

const Candidate* find_candidate(const std::vector<Candidate>& candidates, const LiftOutcome& o) {
  for (const auto& c : candidates) {
    if (c.test_id == o.test_id && c.exec_index == o.exec_index) return &c;
  }
  return nullptr;
}

}  // namespace

std::string lift_manifest(const std::vector<LiftOutcome>& outcomes, const std::vector<Candidate>& candidates) {
  json arr = json::array();
  for (const auto& o : outcomes) arr.push_back(manifest_entry(o, find_candidate(candidates, o)));
  return arr.dump(2) + "\n";
}

size_t write_lifted(const std::filesystem::path& dir, const std::vector<LiftOutcome>& outcomes,
                    const std::vector<Candidate>& candidates) {
  std::filesystem::create_directories(dir);
  json manifest = json::array();
  size_t n = 0;
  for (const auto& o : outcomes) {
    if (!o.confirmed()) continue;
    std::string stem = "lift-" + std::to_string(n++);
    json entry = manifest_entry(o, find_candidate(candidates, o));
    entry.erase("input");
    entry["file"] = stem + ".json";
    std::ofstream(dir / (stem + ".json"), std::ios::binary) << codec::encode(o.lifted).dump(2) << "\n";
    if (const InputSource* s = o.lifted.find("stdin")) {
      std::ofstream(dir / (stem + ".stdin"), std::ios::binary) << s->content;
      entry["stdin_file"] = stem + ".stdin";
    }
    manifest.push_back(std::move(entry));
  }
  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
  return n;
}

}  // namespace unitcarve
