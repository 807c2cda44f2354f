#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ptyck/interp.hpp"
#include "ptyck/syntax.hpp"

using namespace ptyck;
using interp::RunResult;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::filesystem::path(PTYCK_CORPUS_DIR) / name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& src, interp::Options o = {}) { return interp::run_main(parse_program(src), o); }

const char* kCounter = R"(
state C {
  type G : Pi (n | n >= 0) -> C;
  method void up()[unique G(true) -> C >> unique G(n' == n + 1) -> C] {
    this <- unique G(n' == n + 1) -> C;
  }
  method void down()[unique G(n > 0) -> C >> unique G(n' == n - 1) -> C] {
    this <- unique G(n' == n - 1) -> C;
  }
  method void lie()[unique G(true) -> C >> unique G(n' == n + 1) -> C] { skip; }
}
)";

std::string with_main(const std::string& body) { return std::string(kCounter) + "method void main() {\n" + body + "\n}\n"; }

}  // namespace

TEST(Interp, EmptyMainHasEmptyTrace) {
  auto r = run("method void main() { skip; }");
  EXPECT_EQ(r.status, RunResult::Status::Ok) << r.message;
  EXPECT_TRUE(r.trace.empty());
}

TEST(Interp, LetBindsInBody) {
  auto p = parse_program("method void main() { let x = 1 in { print(x + 1); } }");
  interp::Interpreter in(p);
  auto r = in.run_main();
  ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
  EXPECT_EQ(r.output, "2\n");
  EXPECT_EQ(in.lookup("x"), nullptr);
}

TEST(Interp, ArithmeticUsesFloorDivision) {
  auto r = run("method void main() { print(-7 / 2); print(-7 % 2); print(7 / -2); }");
  ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
  EXPECT_EQ(r.output, "-4\n1\n-4\n");
  auto z = run("method void main() { var int x = 1 / 0; }");
  EXPECT_EQ(z.status, RunResult::Status::Error);
}

TEST(Interp, UpdateSolvesRelation) {
  auto r = run(with_main("var unique G(n == 2) -> C c = new C; c.up(); c.down(); c.down(); c.down();"));
  ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
  ASSERT_EQ(r.trace.size(), 4u);
  EXPECT_EQ(r.trace[0].pre.at("n"), 2);
  EXPECT_EQ(r.trace[0].post.at("n"), 3);
  EXPECT_EQ(r.trace[3].post.at("n"), 0);
}

TEST(Interp, PreconditionViolation) {
  auto r = run(with_main("var unique G(n == 0) -> C c = new C; c.up(); c.down(); c.down();"));
  ASSERT_EQ(r.status, RunResult::Status::Violation);
  EXPECT_EQ(r.violation->method, "down");
  EXPECT_EQ(r.violation->kind, "precondition");
  EXPECT_EQ(r.violation->counters.at("n"), 0);
  // The failing call is recorded with an unchanged post.
  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.trace.back().pre, r.trace.back().post);
}

TEST(Interp, PostconditionViolation) {
  auto r = run(with_main("var unique G(n == 0) -> C c = new C; c.lie();"));
  ASSERT_EQ(r.status, RunResult::Status::Violation);
  EXPECT_EQ(r.violation->kind, "postcondition");
  auto off = run(with_main("var unique G(n == 0) -> C c = new C; c.lie();"), {.dynamic_checks = false});
  EXPECT_EQ(off.status, RunResult::Status::Ok);
}

TEST(Interp, SeedDeterminesChoices) {
  std::string src = with_main(R"(
var unique G(n == 0) -> C c = new C;
var int i = 0;
while (i < 20) { match (*) { case (true) { c.up(); } case (c == c) { skip; } default { skip; } } i = i + 1; })");
  auto a = run(src, {.seed = 7});
  auto b = run(src, {.seed = 7});
  ASSERT_EQ(a.status, RunResult::Status::Ok) << a.message;
  EXPECT_EQ(a.choices, b.choices);
  EXPECT_EQ(a.trace, b.trace);
  bool differs = false;
  for (std::uint64_t s = 0; s < 10 && !differs; ++s) differs = run(src, {.seed = s}).choices != a.choices;
  EXPECT_TRUE(differs);
}

TEST(Interp, ScheduleFallsBackToDefaultWhenDisabled) {
  auto r = run("method void main() { match (*) { case (false) { print(1); } default { print(2); } } }",
               {.schedule = {0}});
  EXPECT_EQ(r.output, "2\n");
  EXPECT_EQ(r.choices, std::vector<int>{-1});
}

TEST(Interp, ObjectMatchUsesDynamicState) {
  auto r = run(R"(
state A { }
state B case of A { }
method void main() {
  var A x = new B;
  match (x) { case (A) { print(1); } default { print(2); } }
})");
  ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
  EXPECT_EQ(r.output, "1\n");
}

TEST(Interp, XmlOkNeverViolates) {
  auto p = parse_program(slurp("xml_simple_ok.pts"));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto r = interp::run_main(p, {.seed = seed});
    ASSERT_EQ(r.status, RunResult::Status::Ok) << seed << ": " << r.message;
    EXPECT_EQ(r.trace.size(), 10u);
  }
}

TEST(Interp, XmlBadHasViolatingSchedule) {
  auto p = parse_program(slurp("xml_simple_bad.pts"));
  int violating = 0;
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<int> sched;
    for (int k = 0; k < 3; ++k) sched.push_back((mask >> k) & 1);
    auto r = interp::run_main(p, {.schedule = sched});
    if (r.status == RunResult::Status::Violation) {
      ++violating;
      EXPECT_EQ(r.violation->method, "scanStartElement");
      EXPECT_EQ(mask, 7);
    }
  }
  EXPECT_EQ(violating, 1);
}

TEST(Interp, StepLimit) {
  auto r = run("method void main() { while (true) { skip; } }", {.step_limit = 1000});
  EXPECT_EQ(r.status, RunResult::Status::Error);
  EXPECT_NE(r.message.find("step limit"), std::string::npos);
}

TEST(Trace, JsonlRoundTrip) {
  std::vector<TraceEvent> t{{"up", 1, "C", {{"n", 0}}, {{"n", 1}}}, {"down", 1, "C", {{"n", 1}}, {{"n", 0}}}};
  auto back = parse_trace_jsonl(trace_to_jsonl(t));
  EXPECT_EQ(back, t);
  EXPECT_THROW(parse_trace_jsonl("{\"method\": 3}\n"), std::invalid_argument);
}

TEST(Interp, StackPopRestoresCounters) {
  auto r = run(R"(
state Stack { }
state Bit { }
state Element case of Bit {
  type Id : Pi (b1, b2 | 0 <= b1 && b1 <= 1 && 0 <= b2 && b2 <= 1) -> Bit;
}
state Model case of Stack {
  type S : Pi (c1, c2) -> Stack;
  method void push(unique Id(true) -> Bit >> unique Id(b1' == b1, b2' == b2) -> Bit e)[unique S(true) -> Stack >> unique S(c1' == c1 * 2 + e.b1, c2' == c2 * 2 + e.b2) -> Stack] {
    this <- unique S(c1' == c1 * 2 + e.b1, c2' == c2 * 2 + e.b2) -> Stack;
  }
  method void pop()[unique S(true) -> Stack >> unique S(c1' == c1 / 2, c2' == c2 / 2) -> Stack] {
    this <- unique S(c1' == c1 / 2, c2' == c2 / 2) -> Stack;
  }
}
method void main() {
  var unique S(c1 == 1, c2 == 1) -> Stack s = new Model;
  var unique Id(b1 == 0b0, b2 == 0b1) -> Bit e = new Element;
  s.push(e);
  s.pop();
})");
  ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace[0].post, (pa::Model{{"c1", 2}, {"c2", 3}}));
  EXPECT_EQ(r.trace[1].post, r.trace[0].pre);
}
