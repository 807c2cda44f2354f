// ptyck: check, run, reach, solve, trace-check and corpus subcommands.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptyck/counters.hpp"
#include "ptyck/formula_io.hpp"
#include "ptyck/interp.hpp"
#include "ptyck/ptsa.hpp"
#include "ptyck/solver.hpp"
#include "ptyck/syntax.hpp"
#include "ptyck/typecheck.hpp"

using namespace ptyck;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Config {
  std::string invariant_mode = "both";
  double timeout_secs = 180;
  std::uint64_t seed = 0;
  std::string emit_smt;
  std::string emit_ast;
  std::string output = "text";
  std::string trace_out;
};

/// Bad input or environment; reported and mapped to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::chrono::milliseconds timeout_of(const Config& c) {
  return std::chrono::milliseconds(static_cast<long long>(c.timeout_secs * 1000));
}

// ------------------------------------------------------------------ check

check::Report check_file(const std::string& file, const Config& c, const ast::Program& p) {
  check::Options o;
  auto mode = check::parse_invariant_mode(c.invariant_mode);
  if (!mode) throw UsageError("unknown invariant mode '" + c.invariant_mode + "'");
  o.mode = *mode;
  o.timeout = timeout_of(c);
  (void)file;
  return check::check_program(p, o);
}

/// One SMT-LIB script per failed obligation: PATH, then PATH.2, PATH.3, ...
void emit_obligations(const std::string& path, const check::Report& r) {
  int k = 0;
  for (const auto& d : r.diagnostics) {
    if (!d.formula) continue;
    ++k;
    std::string target = k == 1 ? path : path + "." + std::to_string(k);
    write_file(target, "; " + d.span.str() + " [" + d.rule + "] " + d.message + "\n" + pa::to_smtlib(*d.formula));
  }
}

int cmd_check(const std::string& file, const Config& c) {
  ast::Program p = parse_program(read_file(file));
  if (!c.emit_ast.empty()) write_file(c.emit_ast, ast_to_json(p) + "\n");
  auto r = check_file(file, c, p);
  if (!c.emit_smt.empty()) emit_obligations(c.emit_smt, r);
  std::cout << (c.output == "json" ? r.to_json() + "\n" : r.to_text());
  return r.exit_code();
}

// -------------------------------------------------------------------- run

json violation_json(const interp::Violation& v) {
  return {{"method", v.method},  {"kind", v.kind}, {"contract", v.contract},
          {"counters", v.counters}, {"line", v.span.line}, {"col", v.span.col}};
}

int cmd_run(const std::string& file, const Config& c, const std::vector<int>& schedule, bool no_checks) {
  ast::Program p = parse_program(read_file(file));
  if (!c.emit_ast.empty()) write_file(c.emit_ast, ast_to_json(p) + "\n");
  interp::Options o;
  o.seed = c.seed;
  o.schedule = schedule;
  o.dynamic_checks = !no_checks;
  if (c.output == "text") o.out = &std::cout;
  auto r = interp::run_main(p, o);
  if (!c.trace_out.empty()) write_file(c.trace_out, trace_to_jsonl(r.trace));
  int code = r.status == interp::RunResult::Status::Ok ? 0 : r.status == interp::RunResult::Status::Violation ? 1 : 2;
  if (c.output == "json") {
    json j{{"status", code == 0 ? "ok" : code == 1 ? "violation" : "error"},
           {"seed", c.seed},
           {"choices", r.choices},
           {"events", r.trace.size()},
           {"output", r.output}};
    if (r.violation) j["violation"] = violation_json(*r.violation);
    if (code == 2) j["message"] = r.message;
    std::cout << j.dump(2) << "\n";
  } else if (code == 1) {
    std::cout << "protocol violation: " << r.violation->str() << "\n";
  } else if (code == 2) {
    std::cerr << "error: " << r.message << "\n";
  }
  return code;
}

// ------------------------------------------------------------------ reach

int cmd_reach(const std::string& file, const Config& c) {
  auto cs = counters::parse_counter_system(read_file(file));
  counters::ReachOptions o;
  o.budget = timeout_of(c);
  auto r = counters::compute_reach(cs, o);
  std::cout << r.to_json() << "\n";
  return r.reached ? 0 : 1;
}

// ------------------------------------------------------------------ solve

int cmd_solve(const std::string& file, const Config& c, bool sat, bool smt_input) {
  std::string src = read_file(file);
  pa::Formula f;
  std::map<std::string, pa::Sort> sorts;
  if (smt_input) {
    f = pa::parse_smtlib(src);
  } else {
    auto doc = pa::parse_formula_document(src);
    sorts = doc.sorts;
    f = sat ? pa::Formula::conj({doc.sort_constraint(), doc.body}) : doc.query();
  }
  if (!c.emit_smt.empty()) write_file(c.emit_smt, pa::to_smtlib(f, sorts));
  pa::Limits lim;
  lim.per_query = timeout_of(c);
  json j;
  int code;
  if (sat) {
    auto r = pa::is_satisfiable(f, lim);
    j["result"] = r.sat ? "sat" : "unsat";
    if (r.model) j["model"] = *r.model;
    code = r.sat ? 0 : 1;
  } else {
    bool valid = pa::is_valid(f, lim);
    j["result"] = valid ? "valid" : "invalid";
    if (!valid) j["countermodel"] = *pa::is_satisfiable(pa::Formula::negate(f), lim).model;
    code = valid ? 0 : 1;
  }
  if (c.output == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << j["result"].get<std::string>();
    if (j.contains("model")) std::cout << " " << pa::to_string(j["model"].get<pa::Model>());
    if (j.contains("countermodel")) std::cout << " " << pa::to_string(j["countermodel"].get<pa::Model>());
    std::cout << "\n";
  }
  return code;
}

// ------------------------------------------------------------ trace-check

/// Each receiver's events are checked separately; the index is global.
ptsa::Acceptance check_trace(const ptsa::Automaton& a, const std::vector<TraceEvent>& t) {
  std::map<int, std::vector<std::size_t>> where;
  for (std::size_t i = 0; i < t.size(); ++i) where[t[i].receiver].push_back(i);
  if (where.size() <= 1) return ptsa::accepts_trace(a, t);
  for (const auto& [recv, idx] : where) {
    std::vector<TraceEvent> sub;
    for (auto i : idx) sub.push_back(t[i]);
    auto r = ptsa::accepts_trace(a, sub);
    if (r.accepted) continue;
    if (r.failure_index) r.failure_index = *r.failure_index < idx.size() ? idx[*r.failure_index] : t.size();
    return r;
  }
  return {true, std::nullopt, ""};
}

int cmd_trace_check(const std::string& automaton, const std::string& trace, const Config& c) {
  auto a = ptsa::parse_automaton(read_file(automaton));
  std::vector<TraceEvent> t;
  try {
    t = parse_trace_jsonl(read_file(trace));
  } catch (const std::invalid_argument& e) {
    throw UsageError(trace + ": " + e.what());
  }
  auto r = check_trace(a, t);
  if (c.output == "json") {
    json j{{"result", r.accepted ? "accept" : "reject"}};
    if (r.failure_index) j["index"] = *r.failure_index;
    if (!r.reason.empty()) j["reason"] = r.reason;
    std::cout << j.dump(2) << "\n";
  } else if (r.accepted) {
    std::cout << "accept\n";
  } else {
    std::cout << "reject at index " << *r.failure_index << ": " << r.reason << "\n";
  }
  return r.accepted ? 0 : 1;
}

// ----------------------------------------------------------------- corpus

int cmd_corpus(const std::string& manifest, const Config& c, int runs) {
  json m = json::parse(read_file(manifest));
  fs::path dir = fs::path(manifest).parent_path();
  int failures = 0;
  auto report = [&](bool ok, const std::string& what, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "ok   " : "FAIL ") << what << (detail.empty() ? "" : "  (" + detail + ")") << "\n";
  };
  for (const auto& e : m.value("programs", json::array())) {
    std::string file = e.at("file");
    Config cc = c;
    cc.invariant_mode = e.value("mode", c.invariant_mode);
    auto t0 = std::chrono::steady_clock::now();
    ast::Program p = parse_program(read_file((dir / file).string()));
    auto r = check_file(file, cc, p);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string got = r.needs_invariant() ? "NeedsInvariant" : r.verdict == check::Verdict::Accepted ? "Accepted" : "Rejected";
    std::string want = e.at("expect");
    std::ostringstream detail;
    detail << got << ", " << std::fixed << std::setprecision(2) << secs << "s";
    report(got == want, "check " + file, detail.str());
    if (!e.contains("automata") || got != "Accepted") continue;
    std::map<std::string, ptsa::Automaton> automata;
    for (const auto& [cls, path] : e.at("automata").items())
      automata[cls] = ptsa::parse_automaton(read_file((dir / path.get<std::string>()).string()));
    int bad_runs = 0;
    for (int s = 0; s < runs; ++s) {
      auto rr = interp::run_main(p, {.seed = c.seed + static_cast<std::uint64_t>(s)});
      bool ok = rr.status == interp::RunResult::Status::Ok;
      for (const auto& sub : ptsa::split_by_receiver(rr.trace)) {
        auto a = automata.find(sub.front().receiver_class);
        if (a != automata.end() && !ptsa::accepts_trace(a->second, sub).accepted) ok = false;
      }
      if (!ok) ++bad_runs;
    }
    report(bad_runs == 0, "runs " + file, std::to_string(runs - bad_runs) + "/" + std::to_string(runs) + " accepted");
  }
  for (const auto& e : m.value("counter_systems", json::array())) {
    std::string file = e.at("file");
    counters::ReachOptions o;
    o.budget = timeout_of(c);
    auto r = counters::compute_reach(counters::parse_counter_system(read_file((dir / file).string())), o);
    std::string got = r.reached ? "reached" : std::string("failed: ") + counters::to_string(r.reason);
    bool want_reached = e.at("expect") == "reached";
    report(r.reached == want_reached, "reach " + file, got);
  }
  for (const auto& e : m.value("traces", json::array())) {
    auto a = ptsa::parse_automaton(read_file((dir / e.at("automaton").get<std::string>()).string()));
    auto t = parse_trace_jsonl(read_file((dir / e.at("trace").get<std::string>()).string()));
    auto r = check_trace(a, t);
    bool want_accept = e.at("expect") == "accept";
    bool ok = r.accepted == want_accept;
    if (ok && e.contains("index")) ok = r.failure_index == e.at("index").get<std::size_t>();
    report(ok, "trace " + e.at("trace").get<std::string>(),
           r.accepted ? "accept" : "reject at " + std::to_string(*r.failure_index));
  }
  std::cout << failures << " failure(s)\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ptyck: parameterized typestate checker"};
  app.require_subcommand(1);
  Config cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--timeout-secs", cfg.timeout_secs, "Solver/acceleration budget")->check(CLI::PositiveNumber);
    sub->add_option("--output", cfg.output, "Output format")->check(CLI::IsMember({"text", "json"}));
  };

  std::string file, second;
  std::vector<int> schedule;
  bool no_checks = false, sat = false, smt_input = false;
  int runs = 100;

  auto* check = app.add_subcommand("check", "Statically check a .pts program");
  check->add_option("file", file, ".pts program")->required();
  check->add_option("--invariant-mode", cfg.invariant_mode, "annotated, accelerate or both")
      ->check(CLI::IsMember({"annotated", "accelerate", "both"}));
  check->add_option("--emit-smt", cfg.emit_smt, "Write failed obligations as SMT-LIB");
  check->add_option("--emit-ast", cfg.emit_ast, "Write the AST as JSON");
  common(check);

  auto* run = app.add_subcommand("run", "Interpret main with dynamic contract checks");
  run->add_option("file", file, ".pts program")->required();
  run->add_option("--seed", cfg.seed, "Seed for match(*) choices");
  run->add_option("--schedule", schedule, "Arm indices for the first match(*) statements")->delimiter(',');
  run->add_option("--trace-out", cfg.trace_out, "Write the call trace as JSON lines");
  run->add_option("--emit-ast", cfg.emit_ast, "Write the AST as JSON");
  run->add_flag("--no-checks", no_checks, "Disable dynamic contract checks");
  common(run);

  auto* reach = app.add_subcommand("reach", "Reachability of a .pcs counter system");
  reach->add_option("file", file, ".pcs counter system")->required();
  common(reach);

  auto* solve = app.add_subcommand("solve", "Decide a Presburger formula");
  solve->add_option("file", file, ".pf formula (or SMT-LIB with --smt)")->required();
  solve->add_flag("--sat", sat, "Ask for satisfiability instead of validity");
  solve->add_flag("--smt", smt_input, "Input is an SMT-LIB script");
  solve->add_option("--emit-smt", cfg.emit_smt, "Write the query as SMT-LIB");
  common(solve);

  auto* tc = app.add_subcommand("trace-check", "Check a trace against a .ptsa automaton");
  tc->add_option("automaton", file, ".ptsa automaton")->required();
  tc->add_option("trace", second, ".jsonl trace")->required();
  common(tc);

  auto* corpus = app.add_subcommand("corpus", "Run every entry of a corpus manifest");
  corpus->add_option("manifest", file, "manifest.json")->required();
  corpus->add_option("--seed", cfg.seed, "First seed for interpreter runs");
  corpus->add_option("--runs", runs, "Seeded runs per accepted program")->check(CLI::NonNegativeNumber);
  corpus->add_option("--invariant-mode", cfg.invariant_mode, "Default invariant mode")
      ->check(CLI::IsMember({"annotated", "accelerate", "both"}));
  common(corpus);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(file, cfg);
    if (*run) return cmd_run(file, cfg, schedule, no_checks);
    if (*reach) return cmd_reach(file, cfg);
    if (*solve) return cmd_solve(file, cfg, sat, smt_input);
    if (*tc) return cmd_trace_check(file, second, cfg);
    if (*corpus) return cmd_corpus(file, cfg, runs);
  } catch (const SyntaxError& e) {
    std::cerr << file << ":" << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
