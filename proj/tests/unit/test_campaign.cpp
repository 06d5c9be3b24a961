#include "doctest.h"
#include "testkit.hpp"
#include "unitcarve/campaign.hpp"

using namespace unitcarve;

namespace {

ParameterizedUnitTest fake_test(const std::string& callee, bool params = true, bool setup_error = false) {
  ParameterizedUnitTest t;
  t.base.callee = callee;
  t.base.setup_error = setup_error;
  if (params) t.parameters.push_back(Parameter{});
  return t;
}

CampaignConfig calc_config() {
  CampaignConfig c;
  c.subject = "calc";
  c.seeds = {testkit::stdin_input("1 + 2"), testkit::stdin_input("99 + 1")};
  c.time_budget_s = 600;
  c.rng_seed = 5;
  c.expand = 2;
  c.fuzz_budget = 40;
  return c;
}

}  // namespace

TEST_CASE("seed expansion") {
  Rng rng(1);
  std::vector<SystemInput> seeds{testkit::stdin_input("1 + 2"), testkit::stdin_input("")};
  CHECK(seed_expand(seeds, 0, rng).empty());
  auto out = seed_expand(seeds, 5, rng);
  REQUIRE(out.size() == 10);
  for (size_t i = 5; i < 10; ++i) CHECK_FALSE(out[i].stdin_text().empty());
  int changed = 0;
  for (size_t i = 0; i < 5; ++i) changed += out[i].stdin_text() != "1 + 2";
  CHECK(changed >= 4);

  Rng again(1);
  auto same = seed_expand(seeds, 0, again);
  same = seed_expand(seeds, 5, again);
  CHECK(same == out);
}

TEST_CASE("byte mutations stay close to the seed") {
  Rng rng(9);
  const std::string seed = "hello world";
  for (int i = 0; i < 300; ++i) {
    std::string m = mutate_bytes(seed, rng);
    // at most four edits, none adding more than eight bytes
    CHECK(m.size() <= seed.size() + 32);
    CHECK(m.size() + 16 >= seed.size());
  }
}

TEST_CASE("coverage fraction") {
  const Program& calc = testkit::subject("calc");
  CoverageMap cov;
  CHECK(coverage_fraction(calc, cov, "add") == 0.0);
  cov.hit({"add", 0, Arm::Then});
  CHECK(coverage_fraction(calc, cov, "add") == doctest::Approx(1.0 / (2 * calc.function("add").cond_count)));
  CHECK(coverage_fraction(calc, cov, "make_num") == 0.0);
  Program flat = parse_program("int f() { return 1; } int main() { return f(); }");
  CHECK(coverage_fraction(flat, cov, "f") == 1.0);
}

TEST_CASE("eligibility") {
  CHECK(eligible(fake_test("f"), std::nullopt));
  CHECK_FALSE(eligible(fake_test("f", false), std::nullopt));
  CHECK_FALSE(eligible(fake_test("f", true, true), std::nullopt));
  CHECK(eligible(fake_test("f"), std::set<std::string>{"f"}));
  CHECK_FALSE(eligible(fake_test("g"), std::set<std::string>{"f"}));
}

TEST_CASE("select_next prefers fewest invocations, then lowest coverage") {
  std::vector<ParameterizedUnitTest> pool{fake_test("a"), fake_test("b"), fake_test("c")};
  UnitStats stats{{"a", {5, 0.1}}, {"b", {2, 0.9}}, {"c", {2, 0.4}}};
  CHECK(select_next(pool, stats) == size_t{2});
  stats["c"].coverage_fraction = 0.9;
  CHECK(select_next(pool, stats) == size_t{1});  // full tie: carve order
  CHECK(select_next(pool, stats, std::set<std::string>{"a"}) == size_t{0});
  CHECK(select_next(pool, stats, {}, {0, 3, 0}) == size_t{2});
  // functions never fuzzed have no stats entry and count as zero invocations
  pool.push_back(fake_test("d"));
  CHECK(select_next(pool, stats) == size_t{3});
  CHECK_FALSE(select_next({fake_test("a", false)}, stats).has_value());
  CHECK_FALSE(select_next({}, stats).has_value());
}

TEST_CASE("time budget 0 runs the seeds only") {
  CampaignConfig c = calc_config();
  c.time_budget_s = 0;
  CampaignArtifacts art;
  Report r = run_campaign(testkit::subject("calc"), c, &art);
  CHECK(r.seed_tests == 2);
  CHECK(r.system_tests == 2);
  CHECK(r.iterations == 0);
  CHECK_FALSE(r.phase_one_complete);
  CHECK(r.unit_tests > 0);
  CHECK(art.system_tests.size() == 2);
}

TEST_CASE("a short campaign on calc") {
  CampaignConfig c = calc_config();
  c.max_iterations = 12;
  CampaignArtifacts art;
  Report r = run_campaign(testkit::subject("calc"), c, &art);
  CHECK(r.iterations == 12);
  CHECK(r.phase_one_complete);
  CHECK(r.system_tests >= 6);
  CHECK(r.unit_executions > 0);
  CHECK(r.covered_arms > 0);
  CHECK(r.total_arms == testkit::subject("calc").total_branch_arms());
  CHECK(static_cast<int64_t>(art.pool.size()) == r.unit_tests);
  for (const auto& f : r.failures) {
    // every reported failure reproduces at system level
    auto again = run_system(testkit::subject("calc"), f.input);
    REQUIRE(again.outcome.is_failure());
    CHECK(again.outcome.trap == f.trap);
  }
  for (const auto& l : art.lifts) CHECK(l.confirmed());
  CHECK(r.lifts_attempted == r.failure_confirmed + r.coverage_confirmed + r.false_positives);
}

TEST_CASE("focus restricts fuzzing to the focus functions") {
  CampaignConfig c = calc_config();
  c.max_iterations = 6;
  c.seeds.push_back(testkit::stdin_input("1234 - 567"));
  c.focus = std::set<std::string>{"compare", "sub"};
  Report r = run_campaign(testkit::subject("calc"), c);
  CHECK(r.iterations == 6);
  REQUIRE_FALSE(r.fuzz_executions.empty());
  for (const auto& [f, n] : r.fuzz_executions) CHECK((f == "compare" || f == "sub"));
  CHECK(r.focus == std::vector<std::string>{"compare", "sub"});
}

TEST_CASE("identical configurations give identical reports") {
  CampaignConfig c = calc_config();
  c.max_iterations = 20;
  Report a = run_campaign(testkit::subject("calc"), c);
  Report b = run_campaign(testkit::subject("calc"), c);
  CHECK(same_deterministic(a, b));
  CHECK(a.checkpoints.size() == 2);
  CHECK(agree_up_to_cutoff(a, b));
  c.rng_seed = 6;
  Report other = run_campaign(testkit::subject("calc"), c);
  CHECK_FALSE(agree_up_to_cutoff(a, other));
}

TEST_CASE("reports round trip through JSON") {
  CampaignConfig c = calc_config();
  c.max_iterations = 10;
  c.focus = std::set<std::string>{"add"};
  Report r = run_campaign(testkit::subject("calc"), c);
  std::string json = report_to_json(r);
  Report back = report_from_json(json);
  CHECK(same_deterministic(r, back));
  CHECK(report_to_json(back) == json);
  std::string table = render_table(r);
  CHECK(table.find("Execution times") != std::string::npos);
  CHECK(table.find("Focus functions") != std::string::npos);
  CHECK(table.find("invocations of add") != std::string::npos);
  CHECK_THROWS(report_from_json("{\"results\":{}}"));
}
