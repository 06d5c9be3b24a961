#include "unitcarve/unitfuzz.hpp"

#include <bit>
#include <chrono>
#include <limits>
#include <thread>

#include "codec.hpp"

namespace unitcarve {

using codec::json;

std::string_view strategy_name(IntStrategy s) {
  constexpr std::string_view names[] = {"bitflip", "random", "zero", "max", "min"};
  return names[static_cast<int>(s)];
}

std::string_view strategy_name(DoubleStrategy s) {
  constexpr std::string_view names[] = {"bitflip", "random", "zero", "max", "-max"};
  return names[static_cast<int>(s)];
}

std::string_view strategy_name(StringStrategy s) {
  constexpr std::string_view names[] = {"bitflip", "random-bytes", "random-ascii", "zeros", "ones", "repeat"};
  return names[static_cast<int>(s)];
}

int64_t flip_bit(int64_t v, int bit) {
  return static_cast<int64_t>(static_cast<uint64_t>(v) ^ (uint64_t{1} << (bit & 63)));
}

double flip_bit(double v, int bit) {
  return std::bit_cast<double>(std::bit_cast<uint64_t>(v) ^ (uint64_t{1} << (bit & 63)));
}

std::string repeat_substring(const std::string& v, size_t start, size_t len, int times) {
  start = std::min(start, v.size());
  len = std::min(len, v.size() - start);
  std::string out = v.substr(0, start);
  for (int i = 0; i < times; ++i) out.append(v, start, len);
  out.append(v, start + len, std::string::npos);
  return out;
}

int64_t apply_strategy(IntStrategy s, int64_t v, Rng& rng) {
  switch (s) {
    case IntStrategy::BitFlip:
      return flip_bit(v, static_cast<int>(rng.below(64)));
    case IntStrategy::Random:
      return static_cast<int64_t>(rng.next());
    case IntStrategy::Zero:
      return 0;
    case IntStrategy::Max:
      return std::numeric_limits<int64_t>::max();
    case IntStrategy::Min:
      return std::numeric_limits<int64_t>::min();
  }
  return v;
}

double apply_strategy(DoubleStrategy s, double v, Rng& rng) {
  switch (s) {
    case DoubleStrategy::BitFlip:
      return flip_bit(v, static_cast<int>(rng.below(64)));
    case DoubleStrategy::Random:
      return std::bit_cast<double>(rng.next());
    case DoubleStrategy::Zero:
      return 0.0;
    case DoubleStrategy::Max:
      return std::numeric_limits<double>::max();
    case DoubleStrategy::NegMax:
      return -std::numeric_limits<double>::max();
  }
  return v;
}

std::string apply_strategy(StringStrategy s, const std::string& v, Rng& rng) {
  switch (s) {
    case StringStrategy::BitFlip: {
      if (v.empty()) return v;
      std::string out = v;
      size_t at = rng.below(v.size());
      out[at] = static_cast<char>(static_cast<uint8_t>(out[at]) ^ (1u << rng.below(8)));
      return out;
    }
    case StringStrategy::RandomBytes: {
      std::string out(static_cast<size_t>(rng.between(1, kMaxRandomString)), '\0');
      for (auto& c : out) c = static_cast<char>(rng.below(256));
      return out;
    }
    case StringStrategy::RandomAscii: {
      std::string out(static_cast<size_t>(rng.between(1, kMaxRandomString)), '\0');
      for (auto& c : out) c = static_cast<char>(0x20 + rng.below(0x7f - 0x20));
      return out;
    }
    case StringStrategy::AllZero:
      return std::string(v.size(), '\0');
    case StringStrategy::AllFF:
      return std::string(v.size(), '\xff');
    case StringStrategy::Repeat: {
      if (v.empty()) return v;
      size_t start = rng.below(v.size());
      size_t len = 1 + rng.below(v.size() - start);
      int times = static_cast<int>(rng.between(2, 8));
      return repeat_substring(v, start, len, times);
    }
  }
  return v;
}

int64_t mutate_int(int64_t v, Rng& rng, IntStrategy* chosen) {
  auto s = static_cast<IntStrategy>(rng.below(5));
  if (chosen) *chosen = s;
  return apply_strategy(s, v, rng);
}

double mutate_double(double v, Rng& rng, DoubleStrategy* chosen) {
  auto s = static_cast<DoubleStrategy>(rng.below(5));
  if (chosen) *chosen = s;
  return apply_strategy(s, v, rng);
}

std::string mutate_string(const std::string& v, Rng& rng, StringStrategy* chosen) {
  static constexpr StringStrategy all[] = {StringStrategy::BitFlip,  StringStrategy::RandomBytes,
                                           StringStrategy::RandomAscii, StringStrategy::AllZero,
                                           StringStrategy::AllFF,    StringStrategy::Repeat};
  static constexpr StringStrategy no_source[] = {StringStrategy::RandomBytes, StringStrategy::RandomAscii,
                                                 StringStrategy::AllZero, StringStrategy::AllFF};
  StringStrategy s = v.empty() ? no_source[rng.below(4)] : all[rng.below(6)];
  if (chosen) *chosen = s;
  return apply_strategy(s, v, rng);
}

ParamBinding generate_binding(const ParameterizedUnitTest& test, uint64_t seed, int64_t index) {
  if (index == 0) {
    ParamBinding b = original_binding(test);
    b.seed = seed;
    return b;
  }
  ParamBinding b;
  b.seed = derive_seed(seed, static_cast<uint64_t>(index));
  Rng rng(b.seed);
  for (const auto& p : test.parameters) {
    if (!b.mutator.empty()) b.mutator += ",";
    if (const auto* i = std::get_if<int64_t>(&p.original)) {
      IntStrategy s;
      b.values.emplace_back(mutate_int(*i, rng, &s));
      b.mutator += strategy_name(s);
    } else if (const auto* d = std::get_if<double>(&p.original)) {
      DoubleStrategy s;
      b.values.emplace_back(mutate_double(*d, rng, &s));
      b.mutator += strategy_name(s);
    } else {
      StringStrategy s;
      b.values.emplace_back(mutate_string(std::get<std::string>(p.original), rng, &s));
      b.mutator += strategy_name(s);
    }
  }
  return b;
}

namespace {

struct Execution {
  ParamBinding binding;
  RunResult result;
  int64_t ns = 0;
};

Execution execute(const Program& program, const ParameterizedUnitTest& test, const FuzzConfig& config,
                  int64_t index) {
  Execution ex;
  ex.binding = generate_binding(test, config.seed, index);
  RunOptions options;
  options.profile = config.profile;
  auto t0 = std::chrono::steady_clock::now();
  ex.result = run_unit(program, test, ex.binding, config.limits, options);
  ex.ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  return ex;
}

}  // namespace

FuzzResult fuzz_unit(const Program& program, const ParameterizedUnitTest& test, const CoverageMap& covered,
                     const FuzzConfig& config) {
  FuzzResult out;
  if (test.parameters.empty()) {
    out.stats.aborted = true;
    out.stats.diagnostic = "test has no parameters";
    return out;
  }
  if (test.base.setup_error) {
    out.stats.aborted = true;
    out.stats.diagnostic = "test context was truncated";
    return out;
  }
  CoverageMap seen = covered;
  int workers = std::max(1, config.workers);
  int64_t index = 0;
  while (index < config.budget) {
    if (config.should_stop && config.should_stop()) break;
    int64_t batch = workers == 1 ? 1 : std::min<int64_t>(config.budget - index, int64_t{workers} * 4);
    std::vector<Execution> runs(static_cast<size_t>(batch));
    if (workers == 1) {
      runs[0] = execute(program, test, config, index);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (int64_t k = w; k < batch; k += workers) runs[k] = execute(program, test, config, index + k);
        });
      }
      for (auto& t : pool) t.join();
    }
    for (auto& ex : runs) {
      const int64_t at = index++;
      const Outcome& o = ex.result.outcome;
      if (o.kind == Outcome::Kind::SetupError) {
        out.stats.aborted = true;
        out.stats.diagnostic = "setup error: " + o.detail;
        return out;
      }
      ++out.stats.executions;
      out.stats.unit_ns += ex.ns;
      out.profile_ns += ex.result.profile_ns;
      for (const auto& [f, n] : ex.result.invocations) out.invocations[f] += n;
      if (o.kind == Outcome::Kind::StepLimit) ++out.stats.step_limits;
      BranchSet fresh = ex.result.coverage.new_relative_to(seen);
      seen.merge(ex.result.coverage);
      out.coverage.merge(ex.result.coverage);
      if (at == 0) continue;
      Candidate c;
      c.test_id = test.base.id;
      c.exec_index = at;
      c.outcome = o;
      if (o.is_failure()) {
        c.reason = Candidate::Reason::UnitFailure;
        c.new_branches = std::move(fresh);
        ++out.stats.failures;
      } else if (!fresh.empty()) {
        c.reason = Candidate::Reason::NewCoverage;
        c.new_branches = std::move(fresh);
        ++out.stats.coverage_candidates;
      } else {
        continue;
      }
      c.binding = std::move(ex.binding);
      out.candidates.push_back(std::move(c));
    }
  }
  return out;
}

std::string serialize_candidates(const std::vector<ParameterizedUnitTest>& tests,
                                 const std::vector<Candidate>& candidates) {
  std::string out;
  for (const auto& t : tests) {
    out += json{{"kind", "test"}, {"test", codec::encode(t)}}.dump();
    out += '\n';
  }
  for (const auto& c : candidates) {
    json j = {{"kind", "candidate"},
              {"test_id", c.test_id},
              {"exec", c.exec_index},
              {"reason", c.reason == Candidate::Reason::UnitFailure ? "unit-failure" : "new-coverage"},
              {"outcome", codec::encode(c.outcome)},
              {"new_branches", codec::encode(c.new_branches)},
              {"binding", codec::encode(c.binding)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void deserialize_candidates(std::string_view text, std::vector<ParameterizedUnitTest>& tests,
                            std::vector<Candidate>& candidates) {
  codec::for_each_line(text, [&](const json& j) {
    std::string kind = codec::get_string(j, "kind");
    if (kind == "test") {
      tests.push_back(codec::decode_put(codec::field(j, "test")));
      return;
    }
    if (kind != "candidate") throw codec::DecodeError("unknown record kind '" + kind + "'");
    Candidate c;
    c.test_id = codec::get_string(j, "test_id");
    c.exec_index = codec::get_int(j, "exec");
    std::string reason = codec::get_string(j, "reason");
    if (reason == "unit-failure") {
      c.reason = Candidate::Reason::UnitFailure;
    } else if (reason == "new-coverage") {
      c.reason = Candidate::Reason::NewCoverage;
    } else {
      throw codec::DecodeError("unknown candidate reason '" + reason + "'");
    }
    c.outcome = codec::decode_outcome(codec::field(j, "outcome"));
    c.new_branches = codec::decode_branches(codec::field(j, "new_branches"));
    c.binding = codec::decode_binding(codec::field(j, "binding"));
    candidates.push_back(std::move(c));
  });
}

}  // namespace unitcarve
