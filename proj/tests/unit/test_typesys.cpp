#include <gtest/gtest.h>

#include <random>

#include "ptyck/formula_io.hpp"
#include "ptyck/typesys.hpp"

using namespace ptyck;
using namespace ptyck::types;
using pa::Formula;
using pa::parse_formula;

namespace {

StateHierarchy parser_hierarchy() {
  StateHierarchy h;
  h.add("Parser");
  h.add("Open", "Parser");
  h.add("Close", "Parser");
  h.add("XMLParserSimple", "Parser");
  h.add("Element");
  h.add("StartElement", "Element");
  h.validate();
  return h;
}

Type pts(const std::string& f, const std::string& s) { return Type::pts_state("Fam", parse_formula(f), s); }

}  // namespace

TEST(Hierarchy, MeetAndOrder) {
  auto h = parser_hierarchy();
  EXPECT_TRUE(h.leq("XMLParserSimple", "Parser"));
  EXPECT_FALSE(h.leq("Parser", "XMLParserSimple"));
  EXPECT_TRUE(h.leq("Open", kBottom));
  EXPECT_EQ(h.meet("Open", "Close"), "Parser");
  EXPECT_EQ(h.meet("Open", "StartElement"), kBottom);
  EXPECT_EQ(h.meet("Open", "Open"), "Open");
}

TEST(Hierarchy, Invalid) {
  StateHierarchy h;
  h.add("A", "B");
  EXPECT_THROW(h.validate(), std::invalid_argument);
  h.add("B", "A");
  EXPECT_THROW(h.validate(), std::invalid_argument);
}

TEST(Hierarchy, SemilatticeLaws) {
  auto h = parser_hierarchy();
  auto all = h.states();
  for (const auto& a : all)
    for (const auto& b : all) {
      EXPECT_EQ(h.meet(a, b), h.meet(b, a));
      EXPECT_EQ(h.meet(a, a), a);
      for (const auto& c : all) EXPECT_EQ(h.meet(h.meet(a, b), c), h.meet(a, h.meet(b, c)));
      EXPECT_TRUE(h.leq(a, h.meet(a, b)));
    }
}

TEST(Subtype, Examples) {
  auto h = parser_hierarchy();
  Formula top = Formula::truth(true);
  auto i = Type::base_type(BaseType::Int);
  EXPECT_TRUE(subtype(top, h, i, i));
  EXPECT_FALSE(subtype(top, h, i, Type::base_type(BaseType::Bool)));
  EXPECT_TRUE(subtype(top, h, pts("n >= 1", "Open"), pts("n >= 0", "Open")));
  EXPECT_FALSE(subtype(top, h, pts("n >= 0", "Open"), pts("n >= 1", "Open")));
  EXPECT_TRUE(subtype(parse_formula("n >= 5"), h, pts("true", "Open"), pts("n >= 1", "Open")));
  EXPECT_TRUE(subtype(top, h, Type::state_type("XMLParserSimple"), Type::state_type("Parser")));
  EXPECT_FALSE(subtype(top, h, Type::state_type("Parser"), Type::state_type("XMLParserSimple")));
  EXPECT_TRUE(subtype(top, h, pts("n == 0", "Open"), pts("n >= 0", "Parser")));
  auto u = Type::permissioned(Permission::Unique, pts("n == 0", "Open"));
  auto im = Type::permissioned(Permission::Immutable, pts("n == 0", "Open"));
  EXPECT_FALSE(subtype(top, h, u, im));
  EXPECT_TRUE(subtype(top, h, u, Type::permissioned(Permission::Unique, pts("n <= 0", "Open"))));
}

TEST(TypeEqual, Examples) {
  auto h = parser_hierarchy();
  Formula top = Formula::truth(true);
  EXPECT_TRUE(type_equal(top, h, pts("n == 0 && m == 0", "Open"), pts("m == 0 && n == 0", "Open")));
  EXPECT_FALSE(type_equal(top, h, pts("n >= 0", "Open"), pts("n >= 0", "Close")));
  EXPECT_TRUE(type_equal(top, h, pts("n == 1", "Open"), pts("n >= 1 && n <= 1", "Open")));
}

TEST(Meet, Examples) {
  auto h = parser_hierarchy();
  auto a = pts("ns' == ns + 1", "Open");
  auto b = pts("ne' == ne + 1", "Open");
  Type m = meet_types(h, {a, b});
  EXPECT_EQ(m.state, "Open");
  EXPECT_TRUE(pa::equivalent(m.phi, parse_formula("ns' == ns + 1 || ne' == ne + 1")));
  EXPECT_TRUE(structurally_equal(meet_types(h, {a}), a));
  Type c = meet_types(h, {pts("n >= 0", "Open"), pts("n >= 0", "Close")});
  EXPECT_EQ(c.state, "Parser");
  EXPECT_THROW(meet_types(h, {a, Type::pts_state("Other", Formula::truth(true), "Open")}), NoMeet);
  EXPECT_THROW(meet_types(h, {Type::base_type(BaseType::Int), Type::base_type(BaseType::Bool)}), NoMeet);
  // Upper bound: every input is below the meet.
  for (const auto& t : {a, b}) EXPECT_TRUE(subtype(Formula::truth(true), h, t, m));
}

TEST(Subtype, ReflexiveTransitiveMonotone) {
  auto h = parser_hierarchy();
  std::mt19937 rng(7);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const char* states[] = {"Open", "Close", "Parser"};
  auto gen = [&] {
    std::string f = "n >= " + std::to_string(pick(-2, 2));
    if (pick(0, 1)) f += " && n <= " + std::to_string(pick(0, 4));
    if (pick(0, 1)) f += " || m == " + std::to_string(pick(0, 2));
    return pts(f, states[pick(0, 2)]);
  };
  Formula top = Formula::truth(true);
  for (int i = 0; i < 150; ++i) {
    Type a = gen(), b = gen(), c = gen();
    EXPECT_TRUE(subtype(top, h, a, a));
    if (subtype(top, h, a, b) && subtype(top, h, b, c)) EXPECT_TRUE(subtype(top, h, a, c));
    Formula stronger = parse_formula("n == " + std::to_string(pick(0, 3)));
    if (subtype(top, h, a, b)) EXPECT_TRUE(subtype(stronger, h, a, b));
  }
}

TEST(Context, ScopesAndConstraints) {
  TypingContext g;
  g.bind("x", Type::base_type(BaseType::Int));
  g.push_scope();
  g.bind("x", Type::base_type(BaseType::Bool));
  EXPECT_EQ(g.lookup("x")->base, BaseType::Bool);
  g.pop_scope();
  EXPECT_EQ(g.lookup("x")->base, BaseType::Int);
  EXPECT_EQ(g.lookup("y"), nullptr);
  g.assume(parse_formula("x >= 0"));
  g.assume(parse_formula("x <= 2"));
  EXPECT_TRUE(pa::is_valid(Formula::implies(g.constraint(), parse_formula("x < 3"))));
}
