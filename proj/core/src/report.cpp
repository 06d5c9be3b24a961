#include <cstdio>

#include "codec.hpp"
#include "unitcarve/campaign.hpp"

namespace unitcarve {

using codec::json;

namespace {

json encode_results(const Report& r) {
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"trap", trap_name(f.trap)},
                        {"function", f.function},
                        {"line", f.line},
                        {"detail", f.detail},
                        {"input", codec::encode(f.input)},
                        {"test_id", f.test_id},
                        {"binding", codec::encode(f.binding)},
                        {"iteration", f.iteration},
                        {"hits", f.hits}});
  }
  return {{"subject", r.subject},
          {"rng_seed", r.rng_seed},
          {"fuzz_budget", r.fuzz_budget},
          {"focus", r.focus},
          {"iterations", r.iterations},
          {"phase_one_complete", r.phase_one_complete},
          {"seed_tests", r.seed_tests},
          {"system_tests", r.system_tests},
          {"total_arms", r.total_arms},
          {"covered_arms", r.covered_arms},
          {"functions_reached", r.functions_reached},
          {"unit_functions_reached", r.unit_functions_reached},
          {"unit_tests", r.unit_tests},
          {"eligible_tests", r.eligible_tests},
          {"setup_errors", r.setup_errors},
          {"tests_fuzzed", r.tests_fuzzed},
          {"unit_executions", r.unit_executions},
          {"system_executions", r.system_executions},
          {"failure_candidates", r.failure_candidates},
          {"coverage_candidates", r.coverage_candidates},
          {"lifts_attempted", r.lifts_attempted},
          {"failure_confirmed", r.failure_confirmed},
          {"coverage_confirmed", r.coverage_confirmed},
          {"false_positives", r.false_positives},
          {"other_trap_lifts", r.other_trap_lifts},
          {"lifts_skipped", r.lifts_skipped},
          {"failures", failures},
          {"invocations", r.invocations},
          {"unit_invocations", r.unit_invocations},
          {"fuzz_executions", r.fuzz_executions},
          {"rejected_sites", r.rejected_sites},
          {"diagnostics", r.diagnostics},
          {"checkpoints", r.checkpoints}};
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  out = codec::field(j, key).get<T>();
}

}  // namespace

std::string report_to_json(const Report& r) {
  json timing = {{"started", r.started},
                 {"elapsed_s", r.elapsed_s},
                 {"mean_unit_ns", r.mean_unit_ns},
                 {"mean_system_ns", r.mean_system_ns},
                 {"speedup", r.speedup()},
                 {"mean_unit_ns_by_callee", r.mean_unit_ns_by_callee},
                 {"focus_ns", r.focus_ns},
                 {"unit_ns", r.unit_ns},
                 {"system_ns", r.system_ns}};
  return json{{"results", encode_results(r)}, {"timing", timing}}.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
  json doc = codec::parse(text);
  const json& j = codec::field(doc, "results");
  const json& t = codec::field(doc, "timing");
  Report r;
  try {
    take(j, "subject", r.subject);
    take(j, "rng_seed", r.rng_seed);
    take(j, "fuzz_budget", r.fuzz_budget);
    take(j, "focus", r.focus);
    take(j, "iterations", r.iterations);
    take(j, "phase_one_complete", r.phase_one_complete);
    take(j, "seed_tests", r.seed_tests);
    take(j, "system_tests", r.system_tests);
    take(j, "total_arms", r.total_arms);
    take(j, "covered_arms", r.covered_arms);
    take(j, "functions_reached", r.functions_reached);
    take(j, "unit_functions_reached", r.unit_functions_reached);
    take(j, "unit_tests", r.unit_tests);
    take(j, "eligible_tests", r.eligible_tests);
    take(j, "setup_errors", r.setup_errors);
    take(j, "tests_fuzzed", r.tests_fuzzed);
    take(j, "unit_executions", r.unit_executions);
    take(j, "system_executions", r.system_executions);
    take(j, "failure_candidates", r.failure_candidates);
    take(j, "coverage_candidates", r.coverage_candidates);
    take(j, "lifts_attempted", r.lifts_attempted);
    take(j, "failure_confirmed", r.failure_confirmed);
    take(j, "coverage_confirmed", r.coverage_confirmed);
    take(j, "false_positives", r.false_positives);
    take(j, "other_trap_lifts", r.other_trap_lifts);
    take(j, "lifts_skipped", r.lifts_skipped);
    take(j, "invocations", r.invocations);
    take(j, "unit_invocations", r.unit_invocations);
    take(j, "fuzz_executions", r.fuzz_executions);
    take(j, "rejected_sites", r.rejected_sites);
    take(j, "diagnostics", r.diagnostics);
    take(j, "checkpoints", r.checkpoints);
    for (const auto& f : codec::field(j, "failures")) {
      ReportedFailure rf;
      auto kind = trap_from_name(codec::get_string(f, "trap"));
      if (!kind) throw codec::DecodeError("unknown trap kind");
      rf.trap = *kind;
      rf.function = codec::get_string(f, "function");
      rf.line = static_cast<int>(codec::get_int(f, "line"));
      rf.detail = codec::get_string(f, "detail");
      rf.input = codec::decode_input(codec::field(f, "input"));
      rf.test_id = codec::get_string(f, "test_id");
      rf.binding = codec::decode_binding(codec::field(f, "binding"));
      rf.iteration = codec::get_int(f, "iteration");
      take(f, "hits", rf.hits);
      r.failures.push_back(std::move(rf));
    }
    take(t, "started", r.started);
    take(t, "elapsed_s", r.elapsed_s);
    take(t, "mean_unit_ns", r.mean_unit_ns);
    take(t, "mean_system_ns", r.mean_system_ns);
    take(t, "mean_unit_ns_by_callee", r.mean_unit_ns_by_callee);
    take(t, "focus_ns", r.focus_ns);
    take(t, "unit_ns", r.unit_ns);
    take(t, "system_ns", r.system_ns);
  } catch (const json::exception& e) {
    throw codec::DecodeError(std::string("malformed report: ") + e.what());
  }
  return r;
}

bool same_deterministic(const Report& a, const Report& b) { return encode_results(a) == encode_results(b); }

bool agree_up_to_cutoff(const Report& a, const Report& b) {
  size_t n = std::min(a.checkpoints.size(), b.checkpoints.size());
  if (n == 0) return false;
  for (size_t i = 0; i < n; ++i) {
    if (a.checkpoints[i] != b.checkpoints[i]) return false;
  }
  return true;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void row(std::string& out, const std::string& label, const std::string& value) {
  out += "  ";
  out += label;
  if (label.size() < 34) out.append(34 - label.size(), ' ');
  out += value;
  out += '\n';
}

}  // namespace

std::string render_table(const Report& r) {
  std::string out;
  out += "subject " + r.subject + "  (rng " + std::to_string(r.rng_seed) + ", " + std::to_string(r.iterations) +
         " rounds in " + fmt("%.1f", r.elapsed_s) + " s)\n\n";

  out += "Execution times\n";
  row(out, "mean system test", fmt("%.1f us", r.mean_system_ns / 1e3));
  row(out, "mean unit test", fmt("%.2f us", r.mean_unit_ns / 1e3));
  row(out, "speedup", fmt("%.2fx", r.speedup()));
  for (const auto& [f, ns] : r.mean_unit_ns_by_callee) {
    row(out, "  unit tests of " + f, fmt("%.2f us", ns / 1e3));
  }

  out += "\nLifted unit tests\n";
  row(out, "unit tests carved", std::to_string(r.unit_tests));
  row(out, "unit tests fuzzed", std::to_string(r.tests_fuzzed));
  row(out, "candidates lifted", std::to_string(r.lifts_attempted));
  row(out, "lifted (confirmed)", std::to_string(r.failure_confirmed + r.coverage_confirmed));
  row(out, "  failure-confirmed", std::to_string(r.failure_confirmed));
  row(out, "  coverage-confirmed", std::to_string(r.coverage_confirmed));
  row(out, "false positives", std::to_string(r.false_positives));
  row(out, "% lifted", fmt("%.1f%%", r.percent_lifted()));

  out += "\nBranch coverage\n";
  row(out, "system tests", std::to_string(r.system_tests));
  row(out, "branch coverage",
      fmt("%.1f%%", 100.0 * r.branch_coverage()) + " (" + std::to_string(r.covered_arms) + "/" +
          std::to_string(r.total_arms) + ")");

  out += "\nFunctions reached\n";
  row(out, "by system tests", std::to_string(r.functions_reached.size()));
  row(out, "by unit tests", std::to_string(r.unit_functions_reached.size()));

  if (!r.focus.empty()) {
    out += "\nFocus functions\n";
    row(out, "time in focus functions", fmt("%.3f s", double(r.focus_ns) / 1e9));
    for (const auto& f : r.focus) {
      auto it = r.invocations.find(f);
      row(out, "invocations of " + f, std::to_string(it == r.invocations.end() ? 0 : it->second));
    }
  }

  if (!r.failures.empty()) {
    out += "\nConfirmed failures\n";
    for (const auto& f : r.failures) {
      row(out, std::string(trap_name(f.trap)) + " in " + f.function + ":" + std::to_string(f.line),
          std::to_string(f.hits) + " lift(s), first from " + f.test_id);
    }
  }
  if (!r.diagnostics.empty()) {
    out += "\n" + std::to_string(r.diagnostics.size()) + " diagnostic(s); see the JSON report\n";
  }
  return out;
}

}  // namespace unitcarve
