#pragma once

// Random well-formed programs for parser round-trip tests.

#include <random>
#include <string>

#include "ptyck/syntax.hpp"

namespace ptyck::testing {

using namespace ptyck::ast;
using pa::Formula;
using pa::LinearTerm;

class Fuzz {
 public:
  explicit Fuzz(unsigned seed) : rng_(seed) {}

  Program program() {
    Program p;
    int n = pick(0, 3);
    for (int i = 0; i < n; ++i) p.states.push_back(state("S" + std::to_string(i), 0));
    p.main.return_type.kind = TypeExpr::Kind::Void;
    p.main.name = "main";
    p.main.body = block(2);
    return p;
  }

 private:
  std::mt19937 rng_;

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return pick(0, 1) == 1; }
  std::string ident() {
    static const char* names[] = {"a", "b", "x", "ns", "ne", "this", "count", "el"};
    return names[pick(0, 7)];
  }
  std::string var() {
    static const char* names[] = {"n", "m", "ns", "ne'", "c1", "k"};
    return names[pick(0, 5)];
  }

  LinearTerm term() {
    LinearTerm t(pick(-4, 4));
    int k = pick(1, 2);
    for (int i = 0; i < k; ++i) t.add_var(var(), pick(-3, 3));
    return t;
  }

  Formula formula(int depth) {
    int c = depth <= 0 ? pick(0, 1) : pick(0, 6);
    switch (c) {
      case 0: return Formula::cmp(static_cast<pa::AtomKind>(pick(0, 5)), term(), term());
      case 1: return coin() ? Formula::divides(pick(2, 3), term()) : Formula::truth(coin());
      case 2: return Formula::negate(formula(depth - 1));
      case 3: return Formula::conj({formula(depth - 1), formula(depth - 1)});
      case 4: return Formula::disj({formula(depth - 1), formula(depth - 1)});
      case 5: return Formula::exists(var(), formula(depth - 1));
      default: return Formula::forall(var(), formula(depth - 1));
    }
  }

  TypeExpr type(bool allow_void = false) {
    TypeExpr t;
    int c = pick(allow_void ? 0 : 1, 6);
    if (c == 6 && coin()) {
      t.kind = TypeExpr::Kind::Wildcard;
      return t;
    }
    t.kind = static_cast<TypeExpr::Kind>(c == 6 ? 5 : c);
    if (t.kind != TypeExpr::Kind::Void) t.perm = static_cast<Perm>(pick(0, 2));
    if (t.kind == TypeExpr::Kind::State) t.name = "T" + std::to_string(pick(0, 3));
    if (t.kind == TypeExpr::Kind::Pts) {
      t.name = "Fam";
      int k = pick(0, 2);
      for (int i = 0; i < k; ++i) t.args.push_back(formula(2));
      t.state = "Open";
    }
    return t;
  }

  ExprPtr leaf() {
    auto e = std::make_shared<Expr>();
    switch (pick(0, 4)) {
      case 0:
        e->kind = Expr::Kind::Int;
        e->int_value = pick(0, 20);
        e->binary_literal = pick(0, 3) == 0;
        break;
      case 1:
        e->kind = Expr::Kind::Bool;
        e->bool_value = coin();
        break;
      case 2:
        e->kind = Expr::Kind::String;
        e->text = coin() ? "hi \"there\"\n" : "";
        break;
      default:
        e->kind = Expr::Kind::Var;
        e->text = ident();
    }
    return e;
  }

  ExprPtr expr(int depth) {
    if (depth <= 0) return leaf();
    auto e = std::make_shared<Expr>();
    switch (pick(0, 7)) {
      case 0: return leaf();
      case 1: {
        static const char* ops[] = {"||", "&&", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%"};
        e->kind = Expr::Kind::Binary;
        e->text = ops[pick(0, 12)];
        e->operands = {expr(depth - 1), expr(depth - 1)};
        return e;
      }
      case 2:
        e->kind = Expr::Kind::Unary;
        e->text = coin() ? "!" : "-";
        e->operands = {expr(depth - 1)};
        return e;
      case 3:
        e->kind = Expr::Kind::Field;
        e->text = ident();
        e->operands = {expr(depth - 1)};
        return e;
      case 4: {
        e->kind = Expr::Kind::Call;
        e->text = "m" + std::to_string(pick(0, 2));
        e->has_receiver = coin();
        int k = pick(0, 2) + (e->has_receiver ? 1 : 0);
        for (int i = 0; i < k; ++i) e->operands.push_back(expr(depth - 1));
        return e;
      }
      case 5:
      case 6: {
        e->kind = Expr::Kind::New;
        e->text = "T" + std::to_string(pick(0, 3));
        e->has_constraint = coin();
        if (e->has_constraint)
          for (int i = pick(0, 2); i > 0; --i) e->constraint.push_back(formula(1));
        e->has_inits = coin();
        if (e->has_inits)
          for (int i = pick(0, 2); i > 0; --i) e->inits.push_back({ident(), expr(depth - 1)});
        return e;
      }
      default: return leaf();
    }
  }

  StmtPtr stmt(int depth) {
    auto s = std::make_shared<Stmt>();
    int c = depth <= 0 ? pick(0, 5) : pick(0, 10);
    switch (c) {
      case 0:
        s->kind = Stmt::Kind::VarDecl;
        s->is_val = coin();
        if (coin()) s->type = type();
        s->name = "v" + std::to_string(pick(0, 9));
        if (s->is_val || coin()) s->init = expr(2);
        break;
      case 1: {
        s->kind = Stmt::Kind::Assign;
        auto t = std::make_shared<Expr>();
        t->kind = Expr::Kind::Var;
        t->text = ident();
        if (coin()) {
          auto f = std::make_shared<Expr>();
          f->kind = Expr::Kind::Field;
          f->text = "f";
          f->operands = {t};
          t = f;
        }
        s->target = t;
        s->value = expr(3);
        break;
      }
      case 2:
        s->kind = Stmt::Kind::Update;
        s->target = expr(1);
        s->new_type = type();
        break;
      case 3: s->kind = Stmt::Kind::Skip; break;
      case 4:
        s->kind = Stmt::Kind::Return;
        if (coin()) s->init = expr(2);
        break;
      case 5:
        s->kind = coin() ? Stmt::Kind::Print : Stmt::Kind::Expr;
        s->init = expr(3);
        break;
      case 6:
        s->kind = Stmt::Kind::Let;
        s->name = "l";
        s->init = expr(2);
        s->body.push_back(stmt(depth - 1));
        break;
      case 7: {
        s->kind = Stmt::Kind::Match;
        bool nondet = coin();
        if (!nondet) s->scrutinee = expr(1);
        for (int i = pick(0, 2); i > 0; --i) {
          MatchArm a;
          if (nondet) a.guard = expr(2);
          else a.pattern_state = "T" + std::to_string(pick(0, 3));
          a.body = block(depth - 1);
          s->arms.push_back(std::move(a));
        }
        s->default_body = block(depth - 1);
        break;
      }
      case 8:
        s->kind = Stmt::Kind::While;
        if (coin()) s->invariant = formula(2);
        s->init = expr(2);
        s->body = block(depth - 1);
        break;
      default:
        s->kind = Stmt::Kind::Block;
        s->body = block(depth - 1);
    }
    return s;
  }

  Block block(int depth) {
    Block b;
    for (int i = pick(0, 3); i > 0; --i) b.push_back(stmt(depth));
    return b;
  }

  MethodDecl method(const std::string& name) {
    MethodDecl m;
    m.return_type = type(true);
    m.name = name;
    for (int i = pick(0, 2); i > 0; --i) {
      Param p;
      p.type = type();
      if (coin()) p.post = type();
      p.name = "p" + std::to_string(i);
      m.params.push_back(std::move(p));
    }
    m.has_env = coin();
    if (m.has_env) {
      int k = pick(1, 2);
      for (int i = 0; i < k; ++i) {
        EnvContract c;
        c.pre = type();
        c.post = type();
        if (i > 0) c.target = "f" + std::to_string(i);
        m.env.push_back(std::move(c));
      }
    }
    m.body = block(2);
    return m;
  }

  StateDecl state(const std::string& name, int depth) {
    StateDecl s;
    s.name = name;
    if (coin()) s.parent = "P";
    int k = pick(0, 4);
    for (int i = 0; i < k; ++i) {
      Member m;
      std::string mname = name + "_m" + std::to_string(i);
      switch (pick(0, depth > 0 ? 2 : 3)) {
        case 0:
          m.kind = Member::Kind::Field;
          m.field = std::make_shared<FieldDecl>();
          m.field->is_val = coin();
          m.field->type = type();
          m.field->name = mname;
          if (coin()) m.field->init = expr(2);
          break;
        case 1:
          m.kind = Member::Kind::Method;
          m.method = std::make_shared<MethodDecl>(method(mname));
          break;
        case 2: {
          m.kind = Member::Kind::PtsDef;
          m.pts = std::make_shared<PtsDef>();
          m.pts->name = mname;
          for (int j = pick(0, 3); j > 0; --j) m.pts->vars.push_back("q" + std::to_string(j));
          if (coin()) m.pts->constraint = formula(2);
          m.pts->sort = "Open";
          break;
        }
        default:
          m.kind = Member::Kind::State;
          m.state = std::make_shared<StateDecl>(state(mname, depth + 1));
      }
      s.members.push_back(std::move(m));
    }
    return s;
  }
};

}  // namespace ptyck::testing
