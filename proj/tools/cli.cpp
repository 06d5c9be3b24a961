#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "unitcarve/campaign.hpp"
#include "unitcarve/carver.hpp"
#include "unitcarve/io.hpp"
#include "unitcarve/lifter.hpp"
#include "unitcarve/parameterizer.hpp"
#include "unitcarve/trace.hpp"
#include "unitcarve/unitfuzz.hpp"
#include "unitcarve/vm.hpp"

namespace unitcarve::cli {

namespace fs = std::filesystem;

namespace {

// Carries the exit code out of a subcommand.
struct Failure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Failure{1, "cannot open '" + path + "': " + (fs::exists(path) ? "permission denied" : "file not found")};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw Failure{1, "cannot write '" + path + "'"};
}

Program load_program(const std::string& path) {
  std::string source = read_file(path);
  try {
    return parse_program(source);
  } catch (const ParseError& e) {
    throw Failure{2, path + ":" + e.what()};
  }
}

// `.json` files hold a full SystemInput; anything else is stdin bytes.
SystemInput load_input(const std::string& path) {
  std::string text = read_file(path);
  if (fs::path(path).extension() != ".json") return SystemInput::from_stdin(std::move(text));
  try {
    return input_from_json(text);
  } catch (const std::exception& e) {
    throw Failure{1, path + ": malformed input document: " + e.what()};
  }
}

// Runs a decoder, turning its errors into a diagnostic naming the file.
template <typename F>
auto decode_file(const std::string& path, F&& decode) {
  std::string text = read_file(path);
  try {
    return decode(text);
  } catch (const std::exception& e) {
    throw Failure{1, path + ": " + e.what()};
  }
}

// "dir/name.jsonl" -> "dir/name<suffix>"
std::string beside(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  std::string stem = p.stem().string();
  for (const char* known : {".unit", ".put", ".cand"}) {
    if (stem.size() > std::strlen(known) && stem.ends_with(known)) stem.resize(stem.size() - std::strlen(known));
  }
  return (p.parent_path() / (stem + suffix)).string();
}

struct RunArgs {
  std::string program, stdin_path, trace, coverage;
  std::vector<std::string> args;
  int64_t max_steps = Limits::system().max_steps;
};

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  Program program = load_program(a.program);
  SystemInput input = a.stdin_path.empty() ? SystemInput::from_stdin("") : load_input(a.stdin_path);
  for (size_t i = 0; i < a.args.size(); ++i) input.set("arg" + std::to_string(i), a.args[i]);
  Limits limits;
  limits.max_steps = a.max_steps;
  RunOptions opts;
  opts.trace = !a.trace.empty();
  RunResult r = run_system(program, input, limits, opts);
  out << r.output;
  out.flush();
  if (!a.trace.empty()) write_file(a.trace, serialize_trace(*r.trace));
  if (!a.coverage.empty()) write_file(a.coverage, coverage_to_json(r.coverage));
  if (r.outcome.kind == Outcome::Kind::Ok) return 0;
  err << "program ended in " << describe(r.outcome);
  if (!r.outcome.function.empty()) err << " in " << r.outcome.function << ":" << r.outcome.line;
  if (!r.outcome.detail.empty()) err << ": " << r.outcome.detail;
  err << "\n";
  return 3;
}

struct CarveArgs {
  std::string program, trace, out;
  std::vector<std::string> functions;
};

int do_carve(const CarveArgs& a, std::ostream& out) {
  Program program = load_program(a.program);
  Trace trace = decode_file(a.trace, [](const std::string& t) { return deserialize_trace(t); });
  CarveOptions opts;
  if (!a.functions.empty()) opts.filter = std::set<std::string>(a.functions.begin(), a.functions.end());
  opts.program_path = a.program;
  opts.trace_id = fs::path(a.trace).stem().string();
  std::vector<UnitTest> units = carve(trace, program, opts);
  std::string path = a.out.empty() ? beside(a.trace, ".unit.jsonl") : a.out;
  write_file(path, serialize_units(units));
  out << "carved " << units.size() << " unit test(s) into " << path << "\n";
  return 0;
}

struct ParamArgs {
  std::string units, input, program, out;
};

int do_parameterize(const ParamArgs& a, std::ostream& out) {
  auto units = decode_file(a.units, [](const std::string& t) { return deserialize_units(t); });
  SystemInput input = load_input(a.input);
  std::string prog_path = a.program;
  if (prog_path.empty() && !units.empty()) prog_path = units.front().program;
  if (prog_path.empty() && !units.empty()) throw Failure{1, "no program recorded in the units; pass --program"};
  std::vector<ParameterizedUnitTest> puts;
  if (!units.empty()) {
    Program program = load_program(prog_path);
    for (const auto& u : units) {
      puts.push_back(parameterize(program, u, input));
      out << u.id << ": " << puts.back().parameters.size() << " parameter(s)";
      for (const auto& p : puts.back().parameters) {
        out << " " << p.path << "@" << p.span.source << "[" << p.span.start << "," << p.span.end << ")";
      }
      out << "\n";
    }
  }
  std::string path = a.out.empty() ? beside(a.units, ".put.jsonl") : a.out;
  write_file(path, serialize_puts(puts));
  return 0;
}

struct FuzzArgs {
  std::string puts, covered, program, out;
  int64_t budget = 100;
  uint64_t seed = 0;
  int workers = 1;
};

int do_fuzz(const FuzzArgs& a, std::ostream& out) {
  auto puts = decode_file(a.puts, [](const std::string& t) { return deserialize_puts(t); });
  CoverageMap covered = decode_file(a.covered, [](const std::string& t) { return coverage_from_json(t); });
  std::string prog_path = a.program;
  if (prog_path.empty() && !puts.empty()) prog_path = puts.front().base.program;
  std::vector<Candidate> all;
  if (!puts.empty()) {
    if (prog_path.empty()) throw Failure{1, "no program recorded in the tests; pass --program"};
    Program program = load_program(prog_path);
    for (const auto& t : puts) {
      if (t.parameters.empty() || t.base.setup_error) continue;
      FuzzConfig fc;
      fc.budget = a.budget;
      fc.seed = a.seed;
      fc.workers = a.workers;
      FuzzResult r = fuzz_unit(program, t, covered, fc);
      covered.merge(r.coverage);
      out << t.base.id << ": " << r.stats.executions << " run(s), " << r.stats.failures << " failure(s), "
          << r.stats.coverage_candidates << " coverage candidate(s)";
      if (r.stats.aborted) out << " [aborted: " << r.stats.diagnostic << "]";
      out << "\n";
      for (auto& c : r.candidates) all.push_back(std::move(c));
    }
  }
  std::string path = a.out.empty() ? beside(a.puts, ".cand.jsonl") : a.out;
  write_file(path, serialize_candidates(puts, all));
  out << all.size() << " candidate(s) written to " << path << "\n";
  return 0;
}

struct LiftArgs {
  std::string program, candidates, input, out;
  bool strict = false;
};

int do_lift(const LiftArgs& a, std::ostream& out) {
  Program program = load_program(a.program);
  std::vector<ParameterizedUnitTest> tests;
  std::vector<Candidate> candidates;
  decode_file(a.candidates, [&](const std::string& t) {
    deserialize_candidates(t, tests, candidates);
    return 0;
  });
  SystemInput input = load_input(a.input);
  LiftOptions opts;
  opts.strict_location = a.strict;
  std::vector<LiftOutcome> outcomes;
  for (const auto& c : candidates) {
    auto it = std::find_if(tests.begin(), tests.end(), [&](const auto& t) { return t.base.id == c.test_id; });
    if (it == tests.end()) throw Failure{1, a.candidates + ": candidate refers to unknown test '" + c.test_id + "'"};
    LiftOutcome o = lift(program, input, *it, c, opts);
    out << c.test_id << "#" << c.exec_index << ": " << lift_class_name(o.classification);
    if (o.classification == LiftClass::FailureConfirmed) out << " " << describe(o.result.outcome);
    if (!o.note.empty()) out << " (" << o.note << ")";
    out << "\n";
    outcomes.push_back(std::move(o));
  }
  std::string dir = a.out.empty() ? beside(a.candidates, ".lifted") : a.out;
  size_t n = write_lifted(dir, outcomes, candidates);
  out << n << " confirmed system test(s) written to " << dir << "\n";
  return 0;
}

struct CampaignArgs {
  std::string program, out = "report.json", lifted;
  std::vector<std::string> seeds, focus;
  double time = 900;
  uint64_t rng = 0;
  int workers = 1;
  int64_t fuzz_budget = 100;
  int64_t max_iterations = 0;
  int expand = 10;
  bool strict = false;
};

int do_campaign(const CampaignArgs& a, std::ostream& out) {
  Program program = load_program(a.program);
  CampaignConfig cfg;
  cfg.subject = fs::path(a.program).stem().string();
  if (cfg.subject == "prog") cfg.subject = fs::path(a.program).parent_path().filename().string();
  for (const auto& s : a.seeds) cfg.seeds.push_back(load_input(s));
  cfg.time_budget_s = a.time;
  cfg.rng_seed = a.rng;
  cfg.workers = a.workers;
  cfg.fuzz_budget = a.fuzz_budget;
  cfg.max_iterations = a.max_iterations;
  cfg.expand = a.expand;
  cfg.strict_location = a.strict;
  if (!a.focus.empty()) {
    cfg.focus = std::set<std::string>(a.focus.begin(), a.focus.end());
    for (const auto& f : *cfg.focus) {
      if (program.function_index(f) < 0) throw Failure{1, "--focus: no function named '" + f + "'"};
    }
  }
  CampaignArtifacts art;
  Report report = run_campaign(program, cfg, &art);
  write_file(a.out, report_to_json(report));
  if (!a.lifted.empty()) write_lifted(a.lifted, art.lifts, {});
  out << render_table(report);
  return 0;
}

struct ReportArgs {
  std::string report, format = "table";
};

int do_report(const ReportArgs& a, std::ostream& out) {
  Report r = decode_file(a.report, [](const std::string& t) { return report_from_json(t); });
  out << (a.format == "json" ? report_to_json(r) : render_table(r));
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Carve unit tests from MiniC program runs, fuzz them, and lift the findings back to system inputs.",
               "unitcarve"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a program on a system input");
  run_cmd->add_option("program", run.program, "MiniC source file")->required();
  run_cmd->add_option("--stdin", run.stdin_path, "stdin contents (a .json file holds a full input)");
  run_cmd->add_option("--arg", run.args, "command-line argument, repeatable");
  run_cmd->add_option("--trace", run.trace, "write the invocation trace (JSON lines)");
  run_cmd->add_option("--coverage", run.coverage, "write the branch coverage map");
  run_cmd->add_option("--max-steps", run.max_steps, "step limit")->check(CLI::PositiveNumber);

  CarveArgs carve_a;
  auto* carve_cmd = app.add_subcommand("carve", "Turn the calls of a trace into unit tests");
  carve_cmd->add_option("program", carve_a.program, "MiniC source file")->required();
  carve_cmd->add_option("trace", carve_a.trace, "trace written by run --trace")->required();
  carve_cmd->add_option("--function", carve_a.functions, "only calls to this function, repeatable");
  carve_cmd->add_option("--out", carve_a.out, "output file (default: <trace>.unit.jsonl)");

  ParamArgs param;
  auto* param_cmd = app.add_subcommand("parameterize", "Find input-derived values in carved tests");
  param_cmd->add_option("units", param.units, "unit tests written by carve")->required();
  param_cmd->add_option("--input", param.input, "the system input of the traced run")->required();
  param_cmd->add_option("--program", param.program, "MiniC source (default: the one recorded in the units)");
  param_cmd->add_option("--out", param.out, "output file (default: <units>.put.jsonl)");

  FuzzArgs fuzz;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Fuzz the parameters of parameterized tests");
  fuzz_cmd->add_option("puts", fuzz.puts, "tests written by parameterize")->required();
  fuzz_cmd->add_option("--budget", fuzz.budget, "executions per test")->required()->check(CLI::PositiveNumber);
  fuzz_cmd->add_option("--seed", fuzz.seed, "RNG seed")->required();
  fuzz_cmd->add_option("--covered", fuzz.covered, "coverage already reached (run --coverage)")->required();
  fuzz_cmd->add_option("--program", fuzz.program, "MiniC source (default: the one recorded in the tests)");
  fuzz_cmd->add_option("--workers", fuzz.workers, "executions run in parallel")->check(CLI::PositiveNumber);
  fuzz_cmd->add_option("--out", fuzz.out, "output file (default: <puts>.cand.jsonl)");

  LiftArgs lift_a;
  auto* lift_cmd = app.add_subcommand("lift", "Map candidates back to system inputs and validate them");
  lift_cmd->add_option("program", lift_a.program, "MiniC source file")->required();
  lift_cmd->add_option("candidates", lift_a.candidates, "candidates written by fuzz")->required();
  lift_cmd->add_option("--input", lift_a.input, "the system input the tests were carved from")->required();
  lift_cmd->add_option("--out", lift_a.out, "directory for confirmed inputs (default: <candidates>.lifted)");
  lift_cmd->add_flag("--strict-location", lift_a.strict, "failures must also trap at the same line");

  CampaignArgs camp;
  auto* camp_cmd = app.add_subcommand("campaign", "Run the whole pipeline under a time budget");
  camp_cmd->add_option("program", camp.program, "MiniC source file")->required();
  camp_cmd->add_option("--seed-input", camp.seeds, "seed system input, repeatable")->required();
  camp_cmd->add_option("--time", camp.time, "time budget in seconds")->check(CLI::NonNegativeNumber);
  camp_cmd->add_option("--rng", camp.rng, "RNG seed");
  camp_cmd->add_option("--focus", camp.focus, "only fuzz tests of this function, repeatable");
  camp_cmd->add_option("--out", camp.out, "report file");
  camp_cmd->add_option("--workers", camp.workers, "unit executions run in parallel")->check(CLI::PositiveNumber);
  camp_cmd->add_option("--fuzz-budget", camp.fuzz_budget, "executions per selected test")
      ->check(CLI::PositiveNumber);
  camp_cmd->add_option("--max-iterations", camp.max_iterations, "stop after this many rounds (0: no limit)")
      ->check(CLI::NonNegativeNumber);
  camp_cmd->add_option("--expand", camp.expand, "mutated variants per seed")->check(CLI::NonNegativeNumber);
  camp_cmd->add_option("--lifted", camp.lifted, "directory for the confirmed system inputs");
  camp_cmd->add_flag("--strict-location", camp.strict, "failures must also trap at the same line");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Render a campaign report");
  rep_cmd->add_option("report", rep.report, "report written by campaign")->required();
  rep_cmd->add_option("--format", rep.format, "table or json")->check(CLI::IsMember({"table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (*run_cmd) return do_run(run, out, err);
    if (*carve_cmd) return do_carve(carve_a, out);
    if (*param_cmd) return do_parameterize(param, out);
    if (*fuzz_cmd) return do_fuzz(fuzz, out);
    if (*lift_cmd) return do_lift(lift_a, out);
    if (*camp_cmd) return do_campaign(camp, out);
    if (*rep_cmd) return do_report(rep, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace unitcarve::cli
