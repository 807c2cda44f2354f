#include <set>

#include "ptyck/formula_io.hpp"
#include "ptyck/syntax.hpp"

namespace ptyck {

using namespace ast;

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : ts_(std::move(toks)) {}

  Program program() {
    Program p;
    const Token& first = ts_.peek();
    bool have_main = false;
    std::set<std::string> names;
    while (!ts_.at_end()) {
      if (ts_.peek().is_kw("state")) {
        StateDecl s = state_decl();
        if (!names.insert(s.name).second) throw SyntaxError(s.span, "duplicate state '" + s.name + "'");
        p.states.push_back(std::move(s));
      } else if (ts_.peek().is_kw("method") && ts_.peek(2).is_kw("main")) {
        const Token& at = ts_.peek();
        if (have_main) throw SyntaxError(at.span, "duplicate main");
        p.main = method_decl();
        have_main = true;
      } else {
        ts_.fail("expected state or main");
      }
    }
    if (!have_main) ts_.fail("expected state or main");
    p.span = join(first.span, ts_.previous().span);
    return p;
  }

  ExprPtr whole_expression() {
    ExprPtr e = expr();
    if (!ts_.at_end()) ts_.fail("expected end of input");
    return e;
  }

 private:
  TokenStream ts_;

  Span from(const Token& start) const { return join(start.span, ts_.previous().span); }
  Span from(const Span& start) const { return join(start, ts_.previous().span); }

  StateDecl state_decl() {
    const Token& start = ts_.expect_kw("state");
    StateDecl s;
    s.name = ts_.expect_ident("state name");
    if (ts_.accept_kw("case")) {
      ts_.expect_kw("of");
      s.parent = ts_.expect_ident("state name");
    }
    ts_.expect_punct("{");
    std::set<std::string> names;
    while (!ts_.accept_punct("}")) {
      Member m = member();
      if (!names.insert(m.name()).second) throw SyntaxError(m.span(), "duplicate member '" + m.name() + "'");
      s.members.push_back(std::move(m));
    }
    s.span = from(start);
    return s;
  }

  Member member() {
    Member m;
    const Token& t = ts_.peek();
    if (t.is_kw("var") || t.is_kw("val")) {
      auto f = std::make_shared<FieldDecl>();
      f->is_val = ts_.next().is_kw("val");
      f->type = type();
      f->name = ts_.expect_ident("field name");
      if (ts_.accept_punct("=")) f->init = expr();
      ts_.expect_punct(";");
      f->span = from(t);
      m.kind = Member::Kind::Field;
      m.field = f;
    } else if (t.is_kw("method")) {
      if (ts_.peek(2).is_kw("main")) ts_.fail("main must be declared at top level");
      m.kind = Member::Kind::Method;
      m.method = std::make_shared<MethodDecl>(method_decl());
    } else if (t.is_kw("state")) {
      m.kind = Member::Kind::State;
      m.state = std::make_shared<StateDecl>(state_decl());
    } else if (t.is_kw("type")) {
      m.kind = Member::Kind::PtsDef;
      m.pts = std::make_shared<PtsDef>(pts_def());
    } else {
      ts_.fail("expected var, val, method, state or type");
    }
    return m;
  }

  PtsDef pts_def() {
    const Token& start = ts_.expect_kw("type");
    PtsDef d;
    d.name = ts_.expect_ident("family name");
    ts_.expect_punct(":");
    ts_.expect_kw("Pi");
    ts_.expect_punct("(");
    if (ts_.peek().kind == TokenKind::Ident) {
      d.vars.push_back(ts_.expect_ident("index variable"));
      while (ts_.accept_punct(",")) d.vars.push_back(ts_.expect_ident("index variable"));
    }
    if (ts_.accept_punct("|")) d.constraint = pa::parse_formula(ts_);
    ts_.expect_punct(")");
    ts_.expect_punct("->");
    d.sort = ts_.expect_ident("state name");
    ts_.expect_punct(";");
    d.span = from(start);
    return d;
  }

  TypeExpr type() {
    const Token& start = ts_.peek();
    TypeExpr t;
    if (ts_.accept_kw("unique"))
      t.perm = Perm::Unique;
    else if (ts_.accept_kw("immutable"))
      t.perm = Perm::Immutable;
    const Token& h = ts_.peek();
    if (t.perm == Perm::None && h.is_punct("_")) {
      ts_.next();
      t.kind = TypeExpr::Kind::Wildcard;
    } else if (h.is_kw("void") || h.is_kw("int") || h.is_kw("bool") || h.is_kw("string")) {
      ts_.next();
      t.kind = h.text == "void"  ? TypeExpr::Kind::Void
               : h.text == "int" ? TypeExpr::Kind::Int
               : h.text == "bool" ? TypeExpr::Kind::Bool
                                  : TypeExpr::Kind::String;
    } else if (h.kind == TokenKind::Ident) {
      t.name = ts_.next().text;
      if (ts_.accept_punct("(")) {
        t.kind = TypeExpr::Kind::Pts;
        if (!ts_.peek().is_punct(")")) {
          t.args.push_back(pa::parse_formula(ts_));
          while (ts_.accept_punct(",")) t.args.push_back(pa::parse_formula(ts_));
        }
        ts_.expect_punct(")");
        ts_.expect_punct("->");
        t.state = ts_.expect_ident("state name");
      } else {
        t.kind = TypeExpr::Kind::State;
      }
    } else {
      ts_.fail("expected type");
    }
    t.span = from(start);
    return t;
  }

  MethodDecl method_decl() {
    const Token& start = ts_.expect_kw("method");
    MethodDecl m;
    m.return_type = type();
    if (ts_.accept_kw("main"))
      m.name = "main";
    else
      m.name = ts_.expect_ident("method name");
    ts_.expect_punct("(");
    if (!ts_.peek().is_punct(")")) {
      do {
        const Token& ps = ts_.peek();
        Param p;
        p.type = type();
        if (ts_.accept_punct(">>")) p.post = type();
        p.name = ts_.expect_ident("parameter name");
        p.span = from(ps);
        m.params.push_back(std::move(p));
      } while (ts_.accept_punct(","));
    }
    ts_.expect_punct(")");
    if (m.name == "main" && !m.params.empty()) throw SyntaxError(from(start), "main takes no parameters");
    if (ts_.accept_punct("[")) {
      if (m.name == "main") throw SyntaxError(ts_.previous().span, "main has no contract");
      m.has_env = true;
      do {
        const Token& cs = ts_.peek();
        EnvContract c;
        c.pre = type();
        ts_.expect_punct(">>");
        c.post = type();
        if (!m.env.empty()) c.target = ts_.expect_ident("environment variable");
        c.span = from(cs);
        m.env.push_back(std::move(c));
      } while (ts_.accept_punct(","));
      ts_.expect_punct("]");
    }
    m.body = block();
    m.span = from(start);
    return m;
  }

  Block block() {
    ts_.expect_punct("{");
    Block b;
    while (!ts_.accept_punct("}")) b.push_back(stmt());
    return b;
  }

  StmtPtr make(Stmt::Kind k) {
    auto s = std::make_shared<Stmt>();
    s->kind = k;
    return s;
  }

  StmtPtr stmt() {
    const Token& start = ts_.peek();
    StmtPtr s;
    if (start.is_punct("{")) {
      s = make(Stmt::Kind::Block);
      s->body = block();
    } else if (start.is_kw("var") || start.is_kw("val")) {
      s = make(Stmt::Kind::VarDecl);
      s->is_val = ts_.next().is_kw("val");
      bool untyped = ts_.peek().kind == TokenKind::Ident && (ts_.peek(1).is_punct("=") || ts_.peek(1).is_punct(";"));
      if (!untyped) s->type = type();
      s->name = ts_.expect_ident("variable name");
      if (ts_.accept_punct("=")) s->init = expr();
      else if (s->is_val) ts_.fail("expected '=' (val requires an initializer)");
      ts_.expect_punct(";");
    } else if (start.is_kw("let")) {
      ts_.next();
      s = make(Stmt::Kind::Let);
      s->name = ts_.expect_ident("variable name");
      ts_.expect_punct("=");
      s->init = expr();
      ts_.expect_kw("in");
      s->body.push_back(stmt());
    } else if (start.is_kw("match")) {
      ts_.next();
      s = make(Stmt::Kind::Match);
      ts_.expect_punct("(");
      bool nondet = ts_.accept_punct("*");
      if (!nondet) s->scrutinee = expr();
      ts_.expect_punct(")");
      ts_.expect_punct("{");
      while (ts_.peek().is_kw("case")) {
        const Token& as = ts_.next();
        MatchArm arm;
        ts_.expect_punct("(");
        if (nondet)
          arm.guard = expr();
        else
          arm.pattern_state = ts_.expect_ident("state name");
        ts_.expect_punct(")");
        arm.body = block();
        arm.span = from(as);
        s->arms.push_back(std::move(arm));
      }
      if (!ts_.accept_kw("default")) ts_.fail("expected case or default");
      s->default_body = block();
      ts_.expect_punct("}");
      ts_.accept_punct(";");
    } else if (start.is_kw("while")) {
      ts_.next();
      s = make(Stmt::Kind::While);
      if (ts_.accept_punct("[")) {
        ts_.expect_kw("invariant");
        ts_.expect_punct("{");
        s->invariant = pa::parse_formula(ts_);
        ts_.expect_punct("}");
        ts_.expect_punct("]");
      }
      ts_.expect_punct("(");
      s->init = expr();
      ts_.expect_punct(")");
      s->body = block();
      ts_.accept_punct(";");
    } else if (start.is_kw("skip")) {
      ts_.next();
      s = make(Stmt::Kind::Skip);
      if (!ts_.accept_punct(";") && !ts_.peek().is_punct("}")) ts_.fail("expected ';'");
    } else if (start.is_kw("return")) {
      ts_.next();
      s = make(Stmt::Kind::Return);
      if (!ts_.peek().is_punct(";")) s->init = expr();
      ts_.expect_punct(";");
    } else if (start.is_kw("print")) {
      ts_.next();
      s = make(Stmt::Kind::Print);
      ts_.expect_punct("(");
      s->init = expr();
      ts_.expect_punct(")");
      ts_.expect_punct(";");
    } else {
      ExprPtr e = expr();
      if (ts_.accept_punct("=")) {
        if (e->kind != Expr::Kind::Var && e->kind != Expr::Kind::Field)
          throw SyntaxError(e->span, "left side of '=' must be a variable or field");
        s = make(Stmt::Kind::Assign);
        s->target = e;
        s->value = expr();
      } else if (ts_.accept_punct("<-")) {
        s = make(Stmt::Kind::Update);
        s->target = e;
        s->new_type = type();
      } else {
        s = make(Stmt::Kind::Expr);
        s->init = e;
      }
      ts_.expect_punct(";");
    }
    s->span = from(start);
    return s;
  }

  ExprPtr node(Expr::Kind k, const Span& span) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->span = span;
    return e;
  }

  ExprPtr binary(const std::string& op, ExprPtr l, ExprPtr r) {
    auto e = node(Expr::Kind::Binary, join(l->span, r->span));
    e->text = op;
    e->operands = {std::move(l), std::move(r)};
    return e;
  }

  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr l = and_expr();
    while (ts_.accept_punct("||") || ts_.accept_kw("or")) l = binary("||", l, and_expr());
    return l;
  }

  ExprPtr and_expr() {
    ExprPtr l = cmp_expr();
    while (ts_.accept_punct("&&") || ts_.accept_kw("and")) l = binary("&&", l, cmp_expr());
    return l;
  }

  ExprPtr cmp_expr() {
    ExprPtr l = add_expr();
    static const char* ops[] = {"==", "!=", "<=", ">=", "<", ">"};
    for (const char* op : ops) {
      if (ts_.accept_punct(op)) return binary(op, l, add_expr());
    }
    return l;
  }

  ExprPtr add_expr() {
    ExprPtr l = mul_expr();
    for (;;) {
      if (ts_.accept_punct("+")) l = binary("+", l, mul_expr());
      else if (ts_.accept_punct("-")) l = binary("-", l, mul_expr());
      else return l;
    }
  }

  ExprPtr mul_expr() {
    ExprPtr l = unary_expr();
    for (;;) {
      if (ts_.accept_punct("*")) l = binary("*", l, unary_expr());
      else if (ts_.accept_punct("/")) l = binary("/", l, unary_expr());
      else if (ts_.accept_punct("%")) l = binary("%", l, unary_expr());
      else return l;
    }
  }

  ExprPtr unary_expr() {
    const Token& t = ts_.peek();
    if (t.is_punct("-") || t.is_punct("!") || t.is_kw("not")) {
      ts_.next();
      ExprPtr inner = unary_expr();
      auto e = node(Expr::Kind::Unary, from(t));
      e->text = t.is_punct("-") ? "-" : "!";
      e->operands = {inner};
      return e;
    }
    return postfix_expr();
  }

  std::vector<ExprPtr> args() {
    std::vector<ExprPtr> out;
    ts_.expect_punct("(");
    if (!ts_.peek().is_punct(")")) {
      out.push_back(expr());
      while (ts_.accept_punct(",")) out.push_back(expr());
    }
    ts_.expect_punct(")");
    return out;
  }

  ExprPtr postfix_expr() {
    const Token& start = ts_.peek();
    ExprPtr e = primary();
    while (ts_.accept_punct(".")) {
      std::string member = ts_.expect_ident("member name");
      if (ts_.peek().is_punct("(")) {
        auto c = node(Expr::Kind::Call, {});
        c->text = member;
        c->has_receiver = true;
        c->operands.push_back(e);
        for (auto& a : args()) c->operands.push_back(a);
        c->span = from(start);
        e = c;
      } else {
        auto f = node(Expr::Kind::Field, {});
        f->text = member;
        f->operands = {e};
        f->span = from(start);
        e = f;
      }
    }
    return e;
  }

  ExprPtr primary() {
    const Token& t = ts_.peek();
    switch (t.kind) {
      case TokenKind::Int: {
        ts_.next();
        auto e = node(Expr::Kind::Int, t.span);
        e->int_value = t.value;
        e->binary_literal = t.binary;
        return e;
      }
      case TokenKind::String: {
        ts_.next();
        auto e = node(Expr::Kind::String, t.span);
        e->text = t.text;
        return e;
      }
      case TokenKind::Ident: {
        ts_.next();
        if (ts_.peek().is_punct("(")) {
          auto c = node(Expr::Kind::Call, {});
          c->text = t.text;
          c->operands = args();
          c->span = from(t);
          return c;
        }
        auto e = node(Expr::Kind::Var, t.span);
        e->text = t.text;
        return e;
      }
      default: break;
    }
    if (t.is_kw("true") || t.is_kw("false")) {
      ts_.next();
      auto e = node(Expr::Kind::Bool, t.span);
      e->bool_value = t.is_kw("true");
      return e;
    }
    if (t.is_punct("(")) {
      ts_.next();
      ExprPtr e = expr();
      ts_.expect_punct(")");
      return e;
    }
    if (t.is_kw("new")) {
      ts_.next();
      auto e = node(Expr::Kind::New, {});
      e->text = ts_.expect_ident("state name");
      if (ts_.accept_punct("(")) {
        e->has_constraint = true;
        if (!ts_.peek().is_punct(")")) {
          e->constraint.push_back(pa::parse_formula(ts_));
          while (ts_.accept_punct(",")) e->constraint.push_back(pa::parse_formula(ts_));
        }
        ts_.expect_punct(")");
      }
      if (ts_.accept_punct("{")) {
        e->has_inits = true;
        while (!ts_.accept_punct("}")) {
          FieldInit fi;
          fi.name = ts_.expect_ident("field name");
          ts_.expect_punct("=");
          fi.value = expr();
          ts_.expect_punct(";");
          e->inits.push_back(std::move(fi));
        }
      }
      e->span = from(t);
      return e;
    }
    ts_.fail("expected expression");
  }
};

}  // namespace

Program parse_program(std::vector<Token> tokens) { return Parser(std::move(tokens)).program(); }

Program parse_program(std::string_view source) { return parse_program(tokenize(source)); }

ExprPtr parse_expression(std::string_view source) { return Parser(tokenize(source)).whole_expression(); }

}  // namespace ptyck
