#include <gtest/gtest.h>

#include <array>
#include <random>

#include "ptyck/formula_io.hpp"
#include "ptyck/presburger.hpp"
#include "ptyck/solver.hpp"
#include "support/pa_oracle.hpp"

using namespace ptyck::pa;
using namespace ptyck::testing;

namespace {

LinearTerm V(const std::string& n, Int c = 1) { return LinearTerm::var(n, c); }
LinearTerm K(Int c) { return LinearTerm(c); }

}  // namespace

TEST(Evaluate, Basics) {
  EXPECT_TRUE(evaluate(Formula::eq(V("x"), V("y")), Model{{"x", 3}, {"y", 3}}));
  EXPECT_FALSE(evaluate(Formula::eq(V("x", 2), K(3)), Model{{"x", 1}}));
  EXPECT_TRUE(evaluate(Formula::divides(2, V("x")), Model{{"x", 4}}));
  try {
    evaluate(Formula::ge(V("q"), K(0)), Model{});
    FAIL();
  } catch (const UnboundVariable& e) {
    EXPECT_EQ(e.var(), "q");
  }
}

TEST(Eliminate, SpecExamples) {
  EXPECT_TRUE(eliminate_quantifiers(Formula::exists("x", Formula::eq(V("x") - K(5), K(0)))).is_true());
  EXPECT_TRUE(eliminate_quantifiers(Formula::exists("x", Formula::eq(V("x", 2) - K(3), K(0)))).is_false());
  Formula f = Formula::exists(
      "k", Formula::conj({Formula::eq(V("ns") - V("b1") - V("k"), K(0)), Formula::ge(V("k"), K(0)),
                          Formula::le(V("k"), V("N"))}));
  Formula q = eliminate_quantifiers(f);
  EXPECT_TRUE(q.quantifier_free());
  for_all_models({"N", "b1", "ns"}, -8, 8, [&](auto& m) {
    bool expected = m["ns"] >= m["b1"] && m["ns"] <= m["b1"] + m["N"];
    ASSERT_EQ(evaluate(q, to_model(m)), expected) << q.str();
  });
}

TEST(Eliminate, RandomAgainstExhaustiveOracle) {
  int checked = 0;
  for (unsigned seed = 1; checked < 1000; ++seed) {
    Gen g(seed);
    Formula f = g.formula(4);
    Formula q = eliminate_quantifiers(f);
    ASSERT_TRUE(q.quantifier_free());
    auto fv = names(f);
    for (const auto& v : q.free_vars()) ASSERT_TRUE(f.free_vars().count(v)) << v;
    for_all_models(fv, -8, 8, [&](auto& m) {
      ASSERT_EQ(evaluate(q, to_model(m)), oracle_bounded(f, m)) << "seed " << seed << ": " << f.str() << "  ~>  " << q.str();
    });
    ++checked;
  }
}

TEST(Simplify, PreservesTruth) {
  for (unsigned seed = 5000; seed < 5400; ++seed) {
    Gen g(seed);
    g.quants_left = 0;
    Formula f = g.formula(4);
    Formula s = simplify(f);
    for_all_models({"x", "y", "z"}, -5, 5, [&](auto& m) {
      ASSERT_EQ(evaluate(s, to_model(m)), oracle(f, m, 0)) << f.str() << " ~> " << s.str();
    });
  }
}

TEST(Valid, Examples) {
  EXPECT_TRUE(is_valid(Formula::forall("x", Formula::eq(V("x") - V("x"), K(0)))));
  EXPECT_FALSE(is_valid(Formula::ge(V("ns"), V("ne"))));
  EXPECT_TRUE(is_valid(parse_formula("x >= 0 && x <= 5 => x * 2 <= 10")));
}

TEST(Satisfiable, Examples) {
  auto r = is_satisfiable(Formula::conj({Formula::ge(V("x"), K(1)), Formula::le(V("x"), K(0))}));
  EXPECT_FALSE(r.sat);
  EXPECT_FALSE(r.model.has_value());
  Formula f = Formula::ge(V("x") - V("y"), K(1));
  r = is_satisfiable(f);
  ASSERT_TRUE(r.sat);
  ASSERT_TRUE(r.model);
  EXPECT_TRUE(evaluate(f, *r.model));
  // least absolute values, fixed in name order
  EXPECT_EQ(r.model->at("x"), 0);
  EXPECT_EQ(r.model->at("y"), -1);
}

TEST(Satisfiable, RandomModelsAreWitnesses) {
  for (unsigned seed = 9000; seed < 9300; ++seed) {
    Gen g(seed);
    Formula f = g.formula(4);
    auto fv = names(f);
    bool any = false;
    for_all_models(fv, -8, 8, [&](auto& m) { any = any || oracle_bounded(f, m); });
    auto r = is_satisfiable(f);
    if (any) ASSERT_TRUE(r.sat) << f.str();
    if (r.sat) {
      ASSERT_TRUE(r.model);
      std::map<std::string, long long> m(r.model->begin(), r.model->end());
      ASSERT_TRUE(oracle_bounded(f, m)) << f.str() << " model " << to_string(*r.model);
    }
    if (is_valid(f)) {
      for_all_models(fv, -4, 4, [&](auto& m) { ASSERT_TRUE(oracle_bounded(f, m)) << f.str(); });
    }
  }
}

TEST(Substitute, Examples) {
  Formula f = Formula::ge(V("x"), V("y")).substitute({{"x", V("n") + K(1)}});
  EXPECT_EQ(f, Formula::ge(V("n") + K(1), V("y")));
  Formula g = Formula::exists("x", Formula::ge(V("x"), V("y"))).substitute({{"y", V("x")}});
  ASSERT_EQ(g.kind(), Formula::Kind::Exists);
  EXPECT_NE(g.bound_var(), "x");
  EXPECT_EQ(g.free_vars(), std::set<std::string>{"x"});
  EXPECT_EQ(g.child(), Formula::ge(V(g.bound_var()), V("x")));
  Formula h = Formula::eq(V("ns'"), V("ns") + K(1)).substitute({{"ns", K(0)}});
  EXPECT_EQ(h, Formula::eq(V("ns'"), K(1)));
}

TEST(Substitute, Lemma) {
  for (unsigned seed = 700; seed < 900; ++seed) {
    Gen g(seed);
    g.quants_left = 0;
    Formula f = g.formula(3);
    LinearTerm t = g.term();
    Formula s = f.substitute({{"x", t}});
    for_all_models({"x", "y", "z"}, -3, 3, [&](auto& m) {
      auto m2 = m;
      m2["x"] = evaluate(t, to_model(m));
      ASSERT_EQ(oracle(s, m, 0), oracle(f, m2, 0));
    });
  }
}

TEST(Budget, AtomLimit) {
  Limits l;
  l.max_atoms = 3;
  Formula f = parse_formula("exists x. div(3, x + y) && div(2, x + z) && x >= y && x <= z + 7");
  EXPECT_THROW(eliminate_quantifiers(f, l), BudgetExceeded);
}

TEST(FormulaText, ParsePrintRoundTrip) {
  for (unsigned seed = 100; seed < 400; ++seed) {
    Gen g(seed);
    Formula f = g.formula(4);
    EXPECT_EQ(parse_formula(f.str()).str(), f.str());
  }
  Formula f = parse_formula("forall x : nat. exists y. x' == 2*y || div(3, p.ns - 1) <=> !(x < y)");
  EXPECT_EQ(parse_formula(f.str()), f);
}

TEST(FormulaText, Errors) {
  EXPECT_THROW(parse_formula("x * y >= 0"), ptyck::SyntaxError);
  EXPECT_THROW(parse_formula("x >= "), ptyck::SyntaxError);
  EXPECT_THROW(parse_formula("div(0, x)"), ptyck::SyntaxError);
  try {
    parse_formula("x >= 0 &&\n  y $ 2");
    FAIL();
  } catch (const ptyck::SyntaxError& e) {
    EXPECT_EQ(e.span().line, 2);
  }
}

TEST(FormulaText, DivisionByConstantIsFloor) {
  Formula f = parse_formula("y == x / 3");
  for (Int x = -10; x <= 10; ++x)
    for (Int y = -5; y <= 5; ++y) {
      Int fl = x >= 0 ? x / 3 : -((-x + 2) / 3);
      EXPECT_EQ(evaluate(f, {{"x", x}, {"y", y}}), y == fl) << x << " " << y;
    }
  // The quotient is eliminated: only the written variables remain.
  EXPECT_EQ(f.free_vars(), (std::set<std::string>{"x", "y"}));
  EXPECT_TRUE(is_valid(parse_formula("(2 * c + 1) / 2 == c && 7 / 2 == 3 && -7 / 2 == -4")));
  EXPECT_THROW(parse_formula("x / y == 1"), ptyck::SyntaxError);
  EXPECT_THROW(parse_formula("x / 0 == 1"), ptyck::SyntaxError);
}

TEST(FormulaText, Document) {
  auto d = parse_formula_document("nat x, y; int z;\n x + y >= z || z >= 0");
  EXPECT_EQ(d.sorts.at("x"), Sort::Nat);
  EXPECT_EQ(d.sorts.at("z"), Sort::Int);
  EXPECT_TRUE(is_valid(d.query()));
  EXPECT_FALSE(is_valid(d.body));
}

TEST(SmtLib, RoundTripAndStable) {
  for (unsigned seed = 300; seed < 500; ++seed) {
    Gen g(seed);
    Formula f = g.formula(4);
    std::string s = to_smtlib(f);
    EXPECT_EQ(s, to_smtlib(f));
    EXPECT_EQ(s.rfind("(set-logic LIA)", 0), 0u);
    Formula back = parse_smtlib(s);
    for_all_models(names(f), -3, 3, [&](auto& m) {
      ASSERT_EQ(oracle(back, m, 12), oracle(f, m, 12)) << s;
    });
  }
  std::string named = to_smtlib(parse_formula("p.ns >= 0"));
  EXPECT_NE(named.find("p.ns"), std::string::npos);
}
