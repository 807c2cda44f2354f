#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ptyck/counters.hpp"
#include "ptyck/formula_io.hpp"

using namespace ptyck;
using namespace ptyck::counters;
using pa::Formula;
using pa::Model;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(PTYCK_CORPUS_DIR) + "/" + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using State = std::map<std::string, long long>;

// Plain guard check written against the formula tree.
bool holds(const Formula& f, const State& s) {
  Model m(s.begin(), s.end());
  return pa::evaluate(f, m);
}

State apply(const Transition& t, const std::vector<std::string>& vars, const State& s) {
  State n = s;
  for (const auto& v : vars) {
    const pa::LinearTerm rhs = t.action_for(v).rhs(v);
    long long x = rhs.constant();
    for (const auto& [w, c] : rhs.coeffs()) x += c * s.at(w);
    n[v] = x;
  }
  return n;
}

// States reachable from s by up to `depth` iterations of t.
std::set<State> iterate(const Transition& t, const std::vector<std::string>& vars, State s, int depth) {
  std::set<State> out{s};
  for (int i = 0; i < depth && holds(t.guard, s); ++i) {
    s = apply(t, vars, s);
    out.insert(s);
  }
  return out;
}

Model pair_model(const State& s, const State& sp) {
  Model m(s.begin(), s.end());
  for (const auto& [v, x] : sp) m[primed(v)] = x;
  return m;
}

}  // namespace

TEST(Accelerate, FreeCounter) {
  auto cs = parse_counter_system("vars x; states q; initial q { x == 0 } transition t q -> q { guard { true } action { x' = x + 1; } }");
  Formula acc = accelerate_transition(cs, cs.transitions[0]);
  for (long long x = -4; x <= 4; ++x)
    for (long long y = -4; y <= 8; ++y) EXPECT_EQ(pa::evaluate(acc, {{"x", x}, {"x'", y}}), y >= x);
}

TEST(Accelerate, BoundedCounterMatchesClosedFormAndIteration) {
  auto cs = parse_counter_system(
      "vars x, N; states q; initial q { x == 0 } transition t q -> q { guard { x <= N } action { x' = x + 1; } }");
  const auto& t = cs.transitions[0];
  Formula acc = accelerate_transition(cs, t);
  for (long long x = -4; x <= 8; ++x)
    for (long long n = -4; n <= 8; ++n)
      for (long long y = -4; y <= 8; ++y) {
        bool closed = (y == x) || (y > x && y <= n + 1 && x <= n);
        auto reach = iterate(t, cs.variables, {{"x", x}, {"N", n}}, 64);
        bool iter = reach.count({{"x", y}, {"N", n}}) != 0;
        Model m{{"x", x}, {"N", n}, {"x'", y}, {"N'", n}};
        ASSERT_EQ(pa::evaluate(acc, m), closed);
        ASSERT_EQ(closed, iter);
      }
}

TEST(Accelerate, ScanLoopStartTagAgainstConcreteIteration) {
  auto cs = parse_counter_system(slurp("xml_scan_loop.pcs"));
  const auto& t1 = cs.transitions[0];
  Formula acc = accelerate_transition(cs, t1);
  for (long long b1 = 0; b1 <= 3; ++b1)
    for (long long b2 = 0; b2 <= b1; ++b2)
      for (long long n = 0; n <= 3; ++n) {
        State s{{"ns", b1}, {"ne", b2}, {"i", 0}, {"b1", b1}, {"b2", b2}, {"N", n}};
        auto reach = iterate(t1, cs.variables, s, 64);
        for (long long ns = -1; ns <= 8; ++ns)
          for (long long i = -1; i <= 6; ++i) {
            State sp = s;
            sp["ns"] = ns;
            sp["i"] = i;
            ASSERT_EQ(pa::evaluate(acc, pair_model(s, sp)), reach.count(sp) != 0);
          }
      }
}

TEST(Accelerate, ExactnessProperty) {
  // Every translation self-loop over two counters with small vectors and guards.
  std::vector<std::string> guards = {"x <= N", "x + y <= N && y >= 0", "x >= y", "x == y", "div(2, y) && x <= 3",
                                     "x - 2*y <= N"};
  for (const auto& g : guards)
    for (int dx = -2; dx <= 2; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        std::string src = "vars x, y, N; states q; initial q { true } transition t q -> q { guard { " + g +
                          " } action { x' = x + " + std::to_string(dx) + "; y' = y + " + std::to_string(dy) + "; } }";
        CounterSystem cs;
        try {
          cs = parse_counter_system(src);
        } catch (...) {
          FAIL() << src;
        }
        Formula acc;
        try {
          acc = accelerate_transition(cs, cs.transitions[0]);
        } catch (const NonTranslationAction&) {
          continue;  // divisibility varying along the loop
        }
        for (long long x = -4; x <= 4; ++x)
          for (long long y = -4; y <= 4; ++y)
            for (long long n = 0; n <= 4; ++n) {
              State s{{"x", x}, {"y", y}, {"N", n}};
              auto reach = iterate(cs.transitions[0], cs.variables, s, 64);
              for (long long xp = -12; xp <= 12; ++xp)
                for (long long yp = -8; yp <= 8; ++yp) {
                  State sp{{"x", xp}, {"y", yp}, {"N", n}};
                  ASSERT_EQ(pa::evaluate(acc, pair_model(s, sp)), reach.count(sp) != 0)
                      << g << " d=(" << dx << "," << dy << ") from " << x << "," << y << "," << n;
                }
            }
      }
}

TEST(Accelerate, RejectsResets) {
  auto cs = parse_counter_system("vars x; states q; initial q { true } transition t q -> q { guard { x <= 3 } action { x' = 0; } }");
  EXPECT_THROW(accelerate_transition(cs, cs.transitions[0]), NonTranslationAction);
  auto ds = parse_counter_system(
      "vars x; states q; initial q { true } transition t q -> q { guard { x <= 3 || x >= 9 } action { x' = x + 1; } }");
  EXPECT_THROW(accelerate_transition(ds, ds.transitions[0]), NonTranslationAction);
}

TEST(Reach, ClosedSystem) {
  auto cs = parse_counter_system("vars x; states q; initial q { x >= 2 && x <= 5 }");
  auto r = compute_reach(cs);
  ASSERT_TRUE(r.reached);
  EXPECT_TRUE(pa::equivalent(r.regions.at("q"), pa::parse_formula("x >= 2 && x <= 5")));
}

TEST(Reach, ScanLoopIsInductiveAndExact) {
  auto cs = parse_counter_system(slurp("xml_scan_loop.pcs"));
  auto r = compute_reach(cs);
  ASSERT_TRUE(r.reached) << r.detail;
  const Formula& R = r.regions.at("loop");
  // inductive under both transitions
  for (const auto& t : cs.transitions) {
    std::map<std::string, std::string> ren;
    for (const auto& v : cs.variables) ren[v] = primed(v);
    EXPECT_TRUE(pa::is_valid(Formula::implies(Formula::conj({R, cs.step_relation(t)}), R.rename(ren))));
  }
  // agrees with explicit-state search for small parameters
  for (long long b1 = 0; b1 <= 3; ++b1)
    for (long long b2 = 0; b2 <= b1; ++b2)
      for (long long n = 0; n <= 3; ++n) {
        std::set<State> seen;
        std::vector<State> work{{{"ns", b1}, {"ne", b2}, {"i", 0}, {"b1", b1}, {"b2", b2}, {"N", n}}};
        while (!work.empty()) {
          State s = work.back();
          work.pop_back();
          if (!seen.insert(s).second) continue;
          for (const auto& t : cs.transitions)
            if (holds(t.guard, s)) work.push_back(apply(t, cs.variables, s));
        }
        for (long long ns = b1 - 1; ns <= b1 + 5; ++ns)
          for (long long ne = b2 - 1; ne <= b2 + 5; ++ne)
            for (long long i = -1; i <= 5; ++i) {
              State s{{"ns", ns}, {"ne", ne}, {"i", i}, {"b1", b1}, {"b2", b2}, {"N", n}};
              ASSERT_EQ(holds(R, s), seen.count(s) != 0) << R.str();
            }
      }
}

TEST(Reach, BroadcastFails) {
  auto cs = parse_counter_system(slurp("broadcast.pcs"));
  ReachOptions o;
  o.budget = std::chrono::seconds(60);
  auto r = compute_reach(cs, o);
  EXPECT_FALSE(r.reached);
  EXPECT_TRUE(r.reason == FailureReason::NonTranslationAction || r.reason == FailureReason::Timeout) << r.detail;
}

TEST(Reach, JsonShape) {
  auto cs = parse_counter_system("vars x; states q; initial q { x == 1 }");
  auto j = compute_reach(cs).to_json();
  EXPECT_NE(j.find("\"status\": \"reached\""), std::string::npos);
  EXPECT_NE(j.find("\"q\": \"x == 1\""), std::string::npos);
}

TEST(Adequacy, Trivial) {
  Formula t = Formula::truth(true);
  auto r = check_adequate_invariant(t, t, t, t, t, t);
  EXPECT_TRUE(r.inductive_entry && r.inductive_step && r.adequate);
}

TEST(Extract, TwoPathsAndEmptyBody) {
  LoopSummary l;
  l.counters = {"i", "ns", "ne", "N"};
  l.entry = pa::parse_formula("i == 0 && ns == 4 && ne == 1");
  l.condition = pa::parse_formula("i <= N");
  l.paths.push_back({"", pa::parse_formula("ns >= ne && ns' == ns + 1 && ne' == ne && i' == i + 1 && N' == N")});
  l.paths.push_back({"", pa::parse_formula("ns >= ne && ns' == ns && ne' == ne + 1 && i' == i + 1 && N' == N")});
  auto cs = extract_counter_system(l);
  ASSERT_EQ(cs.transitions.size(), 2u);
  EXPECT_EQ(cs.transitions[0].action_for("ns"), Action::translate(1));
  EXPECT_EQ(cs.transitions[1].action_for("ne"), Action::translate(1));
  EXPECT_EQ(cs.transitions[1].action_for("i"), Action::translate(1));
  EXPECT_TRUE(pa::equivalent(cs.transitions[0].guard, pa::parse_formula("i <= N && ns >= ne")));

  LoopSummary e;
  e.counters = {"i", "N"};
  e.entry = pa::parse_formula("i == 0");
  e.condition = pa::parse_formula("i <= N");
  e.paths.push_back({"", pa::parse_formula("i' == i && N' == N")});
  auto es = extract_counter_system(e);
  ASSERT_EQ(es.transitions.size(), 1u);
  EXPECT_EQ(es.transitions[0].action_for("i").kind, Action::Kind::Identity);

  LoopSummary v = l;
  v.paths = {{"", pa::parse_formula("ns' >= ns && ne' == ne && i' == i + 1 && N' == N")}};
  EXPECT_THROW(extract_counter_system(v), UnsupportedLoopShape);
}

TEST(PcsText, RoundTrip) {
  for (const char* f : {"xml_scan_loop.pcs", "broadcast.pcs"}) {
    auto cs = parse_counter_system(slurp(f));
    std::string p = print_counter_system(cs);
    EXPECT_EQ(print_counter_system(parse_counter_system(p)), p);
  }
  EXPECT_THROW(parse_counter_system("vars x; states q; initial r { true }"), SyntaxError);
  EXPECT_THROW(parse_counter_system("vars x; states q; initial q { y == 0 }"), SyntaxError);
}
