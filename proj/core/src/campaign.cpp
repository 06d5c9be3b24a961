#include "unitcarve/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <limits>
#include <tuple>

#include "unitcarve/carver.hpp"

namespace unitcarve {

std::string mutate_bytes(const std::string& seed, Rng& rng) {
  std::string s = seed;
  int edits = 1 + static_cast<int>(rng.below(4));
  for (int e = 0; e < edits; ++e) {
    int op = s.empty() ? 1 : static_cast<int>(rng.below(5));
    switch (op) {
      case 0: {  // bit flip
        size_t at = rng.below(s.size());
        s[at] = static_cast<char>(static_cast<uint8_t>(s[at]) ^ (1u << rng.below(8)));
        break;
      }
      case 1: {  // insert a byte, half the time one already present in the input
        size_t at = rng.below(s.size() + 1);
        char c = !s.empty() && rng.below(2) == 0 ? s[rng.below(s.size())] : static_cast<char>(rng.below(256));
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(at), c);
        break;
      }
      case 2: {  // delete
        size_t at = rng.below(s.size());
        size_t len = 1 + rng.below(std::min<size_t>(4, s.size() - at));
        s.erase(at, len);
        break;
      }
      case 3: {  // duplicate a run in place
        size_t at = rng.below(s.size());
        size_t len = 1 + rng.below(std::min<size_t>(8, s.size() - at));
        s.insert(at + len, s.substr(at, len));
        break;
      }
      default: {  // overwrite
        s[rng.below(s.size())] = static_cast<char>(rng.below(256));
        break;
      }
    }
  }
  return s;
}

std::vector<SystemInput> seed_expand(const std::vector<SystemInput>& seeds, int n, Rng& rng) {
  std::vector<SystemInput> out;
  if (n <= 0) return out;
  for (const auto& seed : seeds) {
    for (int i = 0; i < n; ++i) {
      SystemInput v = seed;
      for (auto& src : v.sources) src.content = mutate_bytes(src.content, rng);
      out.push_back(std::move(v));
    }
  }
  return out;
}

double coverage_fraction(const Program& program, const CoverageMap& coverage, std::string_view function) {
  int fi = program.function_index(function);
  if (fi < 0) return 1.0;
  int conds = program.functions[static_cast<size_t>(fi)].cond_count;
  if (conds == 0) return 1.0;
  return double(coverage.branches_of(function).size()) / double(2 * conds);
}

bool eligible(const ParameterizedUnitTest& test, const std::optional<std::set<std::string>>& focus) {
  if (test.parameters.empty() || test.base.setup_error) return false;
  return !focus || focus->count(test.base.callee) > 0;
}

std::optional<size_t> select_next(const std::vector<ParameterizedUnitTest>& units, const UnitStats& stats,
                                  const std::optional<std::set<std::string>>& focus,
                                  const std::vector<uint64_t>& fuzz_counts) {
  constexpr uint64_t kDisabled = std::numeric_limits<uint64_t>::max();
  auto key = [&](size_t i) {
    auto it = stats.find(units[i].base.callee);
    FunctionStats fs = it == stats.end() ? FunctionStats{} : it->second;
    uint64_t own = i < fuzz_counts.size() ? fuzz_counts[i] : 0;
    return std::tuple(fs.invocations, fs.coverage_fraction, own);
  };
  std::optional<size_t> best;
  for (size_t i = 0; i < units.size(); ++i) {
    if (!eligible(units[i], focus)) continue;
    if (i < fuzz_counts.size() && fuzz_counts[i] == kDisabled) continue;
    if (!best || key(i) < key(*best)) best = i;
  }
  return best;
}

namespace {

using Clock = std::chrono::steady_clock;

int64_t ns_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
}

uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Campaign {
 public:
  Campaign(const Program& program, const CampaignConfig& config)
      : program_(program), config_(config), start_(Clock::now()) {
    profile_ = config.profile;
    if (profile_.empty() && config.focus) profile_ = *config.focus;
    report_.subject = config.subject;
    report_.rng_seed = config.rng_seed;
    report_.fuzz_budget = config.fuzz_budget;
    if (config.focus) report_.focus.assign(config.focus->begin(), config.focus->end());
    report_.total_arms = program.total_branch_arms();
    report_.started = utc_now();
  }

  Report run(CampaignArtifacts* artifacts) {
    phase_one();
    rounds();
    finish();
    if (artifacts) *artifacts = std::move(art_);
    return std::move(report_);
  }

 private:
  bool out_of_time() const {
    return std::chrono::duration<double>(Clock::now() - start_).count() >= config_.time_budget_s;
  }

  void phase_one() {
    for (const auto& s : config_.seeds) {
      add_system_test(SystemTestRecord::Origin::Seed, s);
      ++report_.seed_tests;
    }
    Rng rng(derive_seed(config_.rng_seed, 0));
    for (auto& v : seed_expand(config_.seeds, config_.expand, rng)) {
      if (out_of_time()) {
        report_.phase_one_complete = false;
        break;
      }
      add_system_test(SystemTestRecord::Origin::Expanded, v);
    }
  }

  // Runs `input` traced, merges its coverage, carves it into the pool.
  void add_system_test(SystemTestRecord::Origin origin, const SystemInput& input) {
    RunOptions opts;
    opts.trace = true;
    opts.profile = profile_;
    auto t0 = Clock::now();
    RunResult r = run_system(program_, input, config_.system_limits, opts);
    account_system(r, ns_since(t0));
    carve_into_pool(input, r);
    art_.system_tests.push_back({origin, input, r.outcome});
  }

  // Rejected lifts count as executions but are not system tests, so their
  // coverage and reached functions stay out.
  void account_system(const RunResult& r, int64_t ns, bool is_test = true) {
    ++report_.system_executions;
    report_.system_ns += ns;
    report_.focus_ns += r.profile_ns;
    for (const auto& [f, n] : r.invocations) report_.invocations[f] += n;
    if (!is_test) return;
    for (const auto& [f, n] : r.invocations) reached_.insert(f);
    art_.system_coverage.merge(r.coverage);
    covered_.merge(r.coverage);
  }

  void carve_into_pool(const SystemInput& input, const RunResult& r) {
    if (!r.trace) return;
    std::string trace_id = "s" + std::to_string(report_.system_tests++);
    try {
      CarveOptions co;
      co.trace_id = trace_id;
      co.replay_limits = config_.unit_limits;
      for (auto& unit : carve(*r.trace, program_, co)) {
        ++report_.unit_tests;
        if (unit.setup_error) ++report_.setup_errors;
        ParameterizedUnitTest put = parameterize(program_, unit, input);
        if (eligible(put, config_.focus)) ++report_.eligible_tests;
        callees_.insert(put.base.callee);
        art_.pool.push_back(std::move(put));
        fuzz_counts_.push_back(0);
      }
    } catch (const std::exception& e) {
      report_.diagnostics.push_back("carving " + trace_id + ": " + e.what());
    }
  }

  UnitStats stats() const {
    UnitStats s;
    for (const auto& f : callees_) {
      auto& fs = s[f];
      auto it = report_.fuzz_executions.find(f);
      fs.invocations = it == report_.fuzz_executions.end() ? 0 : it->second;
      fs.coverage_fraction = coverage_fraction(program_, art_.system_coverage, f);
    }
    return s;
  }

  void rounds() {
    if (!report_.phase_one_complete) return;
    uint64_t digest = fnv1a(config_.subject);
    while (!out_of_time()) {
      if (config_.max_iterations > 0 && report_.iterations >= config_.max_iterations) break;
      auto pick = select_next(art_.pool, stats(), config_.focus, fuzz_counts_);
      if (!pick) break;
      std::string summary;
      if (!round(*pick, summary)) break;
      ++report_.iterations;
      digest = fnv1a(summary, digest);
      if (report_.iterations % 10 == 0) report_.checkpoints.push_back(hex64(digest));
    }
  }

  // One select/fuzz/lift round; false when the deadline cut it short.
  bool round(size_t index, std::string& summary) {
    // Copy: the pool may grow (and reallocate) while lifting.
    const ParameterizedUnitTest test = art_.pool[index];
    if (fuzz_counts_[index]++ == 0) ++report_.tests_fuzzed;
    FuzzConfig fc;
    fc.budget = config_.fuzz_budget;
    fc.seed = derive_seed(config_.rng_seed, static_cast<uint64_t>(report_.iterations) + 1);
    fc.workers = config_.workers;
    fc.limits = config_.unit_limits;
    fc.profile = profile_;
    fc.should_stop = [this] { return out_of_time(); };
    FuzzResult fr = fuzz_unit(program_, test, covered_, fc);

    const std::string& callee = test.base.callee;
    report_.unit_executions += fr.stats.executions;
    report_.unit_ns += fr.stats.unit_ns;
    report_.focus_ns += fr.profile_ns;
    report_.fuzz_executions[callee] += static_cast<uint64_t>(fr.stats.executions);
    unit_ns_by_callee_[callee] += fr.stats.unit_ns;
    for (const auto& [f, n] : fr.invocations) {
      report_.invocations[f] += n;
      report_.unit_invocations[f] += n;
    }
    covered_.merge(fr.coverage);
    if (fr.stats.aborted) {
      report_.diagnostics.push_back(test.base.id + ": " + fr.stats.diagnostic);
      fuzz_counts_[index] = std::numeric_limits<uint64_t>::max();
    }
    if (fr.stats.executions < config_.fuzz_budget && !fr.stats.aborted) return false;

    summary = test.base.id + "|" + std::to_string(fr.stats.executions);
    std::map<std::tuple<TrapKind, std::string, int>, int> attempts;
    for (const auto& c : fr.candidates) {
      if (out_of_time()) return false;
      summary += "|" + std::to_string(c.exec_index);
      if (c.reason == Candidate::Reason::UnitFailure) {
        ++report_.failure_candidates;
        auto site = std::tuple(c.outcome.trap, c.outcome.function, c.outcome.line);
        int& n = attempts[site];
        if (n < 0 || n >= config_.failure_lifts_per_site || confirmed_sites_.count(site)) {
          ++report_.lifts_skipped;
          summary += "s";
          continue;
        }
        ++n;
        LiftClass cls = lift_one(test, c);
        if (cls == LiftClass::FailureConfirmed) confirmed_sites_.insert(site);
        summary += lift_class_name(cls).substr(0, 1);
      } else {
        ++report_.coverage_candidates;
        summary += lift_class_name(lift_one(test, c)).substr(0, 1);
      }
    }
    return true;
  }

  LiftClass lift_one(const ParameterizedUnitTest& test, const Candidate& c) {
    ++report_.lifts_attempted;
    LiftOptions lo;
    lo.limits = config_.system_limits;
    lo.strict_location = config_.strict_location;
    lo.trace = true;
    lo.profile = profile_;
    LiftOutcome out;
    try {
      out = lift(program_, test.base.input, test, c, lo);
    } catch (const std::exception& e) {
      report_.diagnostics.push_back("lifting " + test.base.id + "#" + std::to_string(c.exec_index) + ": " +
                                    e.what());
      ++report_.false_positives;
      return LiftClass::FalsePositive;
    }
    account_system(out.result, out.system_ns, out.confirmed());
    if (!out.confirmed()) {
      ++report_.false_positives;
      if (c.reason == Candidate::Reason::UnitFailure) {
        ++report_.rejected_sites[std::string(trap_name(c.outcome.trap)) + "@" + c.outcome.function + ":" +
                                 std::to_string(c.outcome.line)];
      }
      if (!out.note.empty()) ++report_.other_trap_lifts;
      return out.classification;
    }
    if (out.classification == LiftClass::FailureConfirmed) {
      ++report_.failure_confirmed;
      record_failure(out, c);
    } else {
      ++report_.coverage_confirmed;
    }
    carve_into_pool(out.lifted, out.result);
    art_.system_tests.push_back({SystemTestRecord::Origin::Lifted, out.lifted, out.result.outcome});
    LiftClass cls = out.classification;
    out.result.trace.reset();
    art_.lifts.push_back(std::move(out));
    return cls;
  }

  void record_failure(const LiftOutcome& out, const Candidate& c) {
    const Outcome& o = out.result.outcome;
    for (auto& f : report_.failures) {
      if (f.trap == o.trap && f.function == o.function && f.line == o.line) {
        ++f.hits;
        return;
      }
    }
    ReportedFailure f;
    f.trap = o.trap;
    f.function = o.function;
    f.line = o.line;
    f.detail = o.detail;
    f.input = out.lifted;
    f.test_id = c.test_id;
    f.binding = c.binding;
    f.iteration = report_.iterations;
    f.hits = 1;
    report_.failures.push_back(std::move(f));
  }

  void finish() {
    report_.covered_arms = static_cast<int64_t>(art_.system_coverage.size());
    report_.functions_reached.assign(reached_.begin(), reached_.end());
    for (const auto& [f, n] : report_.unit_invocations) report_.unit_functions_reached.push_back(f);
    report_.elapsed_s = std::chrono::duration<double>(Clock::now() - start_).count();
    if (report_.unit_executions > 0) report_.mean_unit_ns = double(report_.unit_ns) / double(report_.unit_executions);
    if (report_.system_executions > 0) {
      report_.mean_system_ns = double(report_.system_ns) / double(report_.system_executions);
    }
    for (const auto& [f, ns] : unit_ns_by_callee_) {
      uint64_t n = report_.fuzz_executions[f];
      if (n > 0) report_.mean_unit_ns_by_callee[f] = double(ns) / double(n);
    }
  }

  const Program& program_;
  const CampaignConfig& config_;
  Clock::time_point start_;
  std::set<std::string> profile_;
  Report report_;
  CampaignArtifacts art_;
  // Units plus confirmed system runs: what counts as already covered when
  // judging fuzz candidates.
  CoverageMap covered_;
  std::vector<uint64_t> fuzz_counts_;
  std::set<std::string> reached_;
  std::set<std::string> callees_;  // of pool tests
  // Unit-level trap sites with a confirmed lift; later candidates there are
  // known failures and are not lifted again.
  std::set<std::tuple<TrapKind, std::string, int>> confirmed_sites_;
  std::map<std::string, int64_t> unit_ns_by_callee_;
};

}  // namespace

Report run_campaign(const Program& program, const CampaignConfig& config, CampaignArtifacts* artifacts) {
  return Campaign(program, config).run(artifacts);
}

}  // namespace unitcarve
