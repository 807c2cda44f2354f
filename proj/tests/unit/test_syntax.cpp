#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ptyck/syntax.hpp"
#include "support/ast_fuzz.hpp"

using namespace ptyck;
using namespace ptyck::ast;
using pa::Formula;
using pa::LinearTerm;
using ptyck::testing::Fuzz;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> corpus_programs() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(PTYCK_CORPUS_DIR))
    if (e.path().extension() == ".pts") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void expect_round_trip(const Program& p) {
  std::string text = pretty_print(p);
  Program q;
  ASSERT_NO_THROW(q = parse_program(text)) << text;
  EXPECT_TRUE(equal(p, q)) << text << "\n---\n" << pretty_print(q);
  EXPECT_EQ(text, pretty_print(q));
}

// ---- span containment

void check_expr_spans(const Expr& e, const Span& parent) {
  EXPECT_TRUE(parent.contains(e.span)) << e.span.str();
  for (const auto& o : e.operands) check_expr_spans(*o, e.span);
  for (const auto& fi : e.inits) check_expr_spans(*fi.value, e.span);
}

void check_block_spans(const Block& b, const Span& parent);

void check_stmt_spans(const Stmt& s, const Span& parent) {
  EXPECT_TRUE(parent.contains(s.span)) << s.span.str();
  for (const auto* e : {&s.init, &s.target, &s.value, &s.scrutinee})
    if (*e) check_expr_spans(**e, s.span);
  if (s.type) EXPECT_TRUE(s.span.contains(s.type->span));
  if (s.new_type) EXPECT_TRUE(s.span.contains(s.new_type->span));
  for (const auto& a : s.arms) {
    EXPECT_TRUE(s.span.contains(a.span));
    if (a.guard) check_expr_spans(*a.guard, a.span);
    check_block_spans(a.body, a.span);
  }
  check_block_spans(s.default_body, s.span);
  check_block_spans(s.body, s.span);
}

void check_block_spans(const Block& b, const Span& parent) {
  for (const auto& s : b) check_stmt_spans(*s, parent);
}

void check_method_spans(const MethodDecl& m, const Span& parent) {
  EXPECT_TRUE(parent.contains(m.span));
  for (const auto& p : m.params) EXPECT_TRUE(m.span.contains(p.span));
  for (const auto& c : m.env) EXPECT_TRUE(m.span.contains(c.span));
  check_block_spans(m.body, m.span);
}

void check_state_spans(const StateDecl& s, const Span& parent) {
  EXPECT_TRUE(parent.contains(s.span));
  for (const auto& m : s.members) {
    EXPECT_TRUE(s.span.contains(m.span()));
    if (m.kind == Member::Kind::Method) check_method_spans(*m.method, s.span);
    if (m.kind == Member::Kind::State) check_state_spans(*m.state, s.span);
    if (m.kind == Member::Kind::Field && m.field->init) check_expr_spans(*m.field->init, m.field->span);
  }
}

}  // namespace

TEST(Lexer, StateHeader) {
  auto toks = tokenize("state S case of T {}");
  ASSERT_EQ(toks.size(), 8u);  // incl. end marker
  EXPECT_TRUE(toks[0].is_kw("state"));
  EXPECT_EQ(toks[1].kind, TokenKind::Ident);
  EXPECT_TRUE(toks[2].is_kw("case"));
  EXPECT_TRUE(toks[3].is_kw("of"));
  EXPECT_EQ(toks[4].text, "T");
  EXPECT_TRUE(toks[5].is_punct("{"));
  EXPECT_TRUE(toks[6].is_punct("}"));
}

TEST(Lexer, PtsHeaderAndBinary) {
  auto toks = tokenize("Pi (n, m | n >= m) -> Parser");
  std::vector<std::string> texts;
  for (const auto& t : toks) texts.push_back(t.text);
  EXPECT_NE(std::find(texts.begin(), texts.end(), "|"), texts.end());
  EXPECT_NE(std::find(texts.begin(), texts.end(), "->"), texts.end());
  EXPECT_TRUE(toks[0].is_kw("Pi"));
  auto bin = tokenize("0b01");
  EXPECT_EQ(bin[0].kind, TokenKind::Int);
  EXPECT_EQ(bin[0].value, 1);
  EXPECT_TRUE(bin[0].binary);
}

TEST(Parser, XmlProgramShape) {
  Program p = parse_program(slurp(std::filesystem::path(PTYCK_CORPUS_DIR) / "xml_simple_ok.pts"));
  const StateDecl* xml = nullptr;
  for (const auto& s : p.states)
    if (s.name == "XMLParserSimple") xml = &s;
  ASSERT_NE(xml, nullptr);
  EXPECT_EQ(xml->parent.value_or(""), "Parser");
  int methods = 0, pts = 0;
  for (const auto& m : xml->members) {
    methods += m.kind == Member::Kind::Method;
    pts += m.kind == Member::Kind::PtsDef;
  }
  EXPECT_EQ(methods, 4);
  EXPECT_EQ(pts, 1);
  EXPECT_EQ(p.main.name, "main");
}

TEST(Parser, WildcardContract) {
  Program p = parse_program("state B { method void m()[_ >> _]{ skip } } method void main() { }");
  const auto& m = *p.states[0].members[0].method;
  ASSERT_EQ(m.env.size(), 1u);
  EXPECT_EQ(m.env[0].pre.kind, TypeExpr::Kind::Wildcard);
  EXPECT_EQ(m.env[0].post.kind, TypeExpr::Kind::Wildcard);
  EXPECT_EQ(m.body.front()->kind, Stmt::Kind::Skip);
}

TEST(Parser, Errors) {
  try {
    parse_program("");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_NE(std::string(e.what()).find("expected state or main"), std::string::npos);
  }
  EXPECT_THROW(parse_program("state A {} state A {} method void main() {}"), SyntaxError);
  EXPECT_THROW(parse_program("method void main() { match (x) { case (A) { } } }"), SyntaxError);
  EXPECT_THROW(parse_program("method void main() { 1 + 2 = 3; }"), SyntaxError);
  EXPECT_THROW(parse_program("method void main() { val x; }"), SyntaxError);
  try {
    parse_program("method void main() {\n  skip;\n  x = ;\n}");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.span().line, 3);
  }
}

TEST(Parser, PrecedenceAndPrinting) {
  auto e = parse_expression("a + b * c == d && !e || f");
  EXPECT_EQ(e->text, "||");
  EXPECT_EQ(pretty_print(*e), "a + b * c == d && !e || f");
  auto g = parse_expression("(a - (b - c)) * -x.y(1, 2).z");
  EXPECT_EQ(pretty_print(*g), "(a - (b - c)) * -x.y(1, 2).z");
  auto h = parse_expression("!(a == b)");
  EXPECT_EQ(pretty_print(*h), "!(a == b)");
}

TEST(Parser, NestedQuantifierInPtsDef) {
  const char* src =
      "state S { type F : Pi (a, b | exists k. (a == 2 * k && forall j. (j < k || b >= j))) -> S; }\n"
      "method void main() { }";
  Program p = parse_program(src);
  expect_round_trip(p);
}

TEST(RoundTrip, Corpus) {
  auto files = corpus_programs();
  ASSERT_FALSE(files.empty());
  for (const auto& f : files) {
    SCOPED_TRACE(f.string());
    std::string src = slurp(f);
    Program p = parse_program(src);
    expect_round_trip(p);
    Span whole{1, 1, 0, 0, 0, src.size()};
    for (const auto& s : p.states) check_state_spans(s, whole);
    check_method_spans(p.main, whole);
  }
}

TEST(RoundTrip, Fuzz500) {
  for (unsigned seed = 0; seed < 500; ++seed) {
    SCOPED_TRACE(seed);
    Program p = Fuzz(seed).program();
    std::string text = pretty_print(p);
    Program q;
    try {
      q = parse_program(text);
    } catch (const SyntaxError& e) {
      FAIL() << e.what() << "\n" << text;
    }
    ASSERT_TRUE(equal(p, q)) << text << "\n---\n" << pretty_print(q);
  }
}

TEST(AstJson, HasSpansAndKinds) {
  Program p = parse_program("method void main() { var int x = 0b101; print(x); }");
  std::string j = ast_to_json(p);
  EXPECT_NE(j.find("\"kind\": \"var\""), std::string::npos);
  EXPECT_NE(j.find("\"binary\": true"), std::string::npos);
  EXPECT_NE(j.find("\"line\": 1"), std::string::npos);
}
