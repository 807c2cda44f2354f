#include "ptyck/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "ptyck/counters.hpp"
#include "ptyck/typesys.hpp"

namespace ptyck::check {

namespace {

using ast::Expr;
using ast::Stmt;
using ast::TypeExpr;
using pa::Formula;
using pa::LinearTerm;

using Clock = std::chrono::steady_clock;

struct Obj {
  std::string cls;    // class used for method and field lookup
  std::string state;  // regular typestate
  bool pts = false;
  std::string family;
  ast::Perm perm = ast::Perm::Unique;
  std::map<std::string, std::string> ctr;  // counter -> symbol
};

struct Var {
  enum class Kind { Int, Bool, String, Object };
  Kind kind = Kind::Int;
  std::string sym;  // Int/Bool
  Obj obj;
  bool is_val = false;
  bool moved = false;
};

struct Val {
  enum class Kind { Void, Int, Bool, String, Object, Error };
  Kind kind = Kind::Void;
  LinearTerm term;
  std::optional<Formula> cond;  // nullopt: unknown truth value
  Obj obj;
  std::string var;              // source variable for object reads
  const Expr* made_by = nullptr;  // `new` expression

  Val() = default;
  explicit Val(Kind k) : kind(k) {}
  Val(Kind k, LinearTerm t) : kind(k), term(std::move(t)) {}
};

Val error_val() { return Val{Val::Kind::Error}; }

struct St {
  std::vector<std::map<std::string, Var>> scopes{1};
  Formula phi;

  bool dead() const { return phi.is_false(); }
  Var* find(const std::string& n) {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }
  void assume(const Formula& f) { phi = pa::simplify(Formula::conj({phi, f})); }
  std::set<std::string> symbols() const {
    std::set<std::string> out;
    for (const auto& sc : scopes)
      for (const auto& [n, v] : sc) {
        if (!v.sym.empty()) out.insert(v.sym);
        for (const auto& [c, s] : v.obj.ctr) out.insert(s);
      }
    return out;
  }
};

std::string strip_primes(std::string n, bool& primed) {
  primed = false;
  while (!n.empty() && n.back() == '\'') {
    n.pop_back();
    primed = true;
  }
  return n;
}

/// Disjunctive normal form of a quantifier-free NNF formula.
std::vector<Formula> dnf(const Formula& f, std::size_t cap) {
  switch (f.kind()) {
    case Formula::Kind::True: return {Formula::truth(true)};
    case Formula::Kind::False: return {};
    case Formula::Kind::Or: {
      std::vector<Formula> out;
      for (const auto& c : f.children()) {
        auto d = dnf(c, cap);
        out.insert(out.end(), d.begin(), d.end());
        if (out.size() > cap) throw counters::UnsupportedLoopShape("too many loop paths");
      }
      return out;
    }
    case Formula::Kind::And: {
      std::vector<Formula> acc{Formula::truth(true)};
      for (const auto& c : f.children()) {
        auto d = dnf(c, cap);
        std::vector<Formula> next;
        for (const auto& a : acc)
          for (const auto& b : d) next.push_back(Formula::conj({a, b}));
        if (next.size() > cap) throw counters::UnsupportedLoopShape("too many loop paths");
        acc = std::move(next);
      }
      return acc;
    }
    default: return {f};
  }
}

struct Slot {
  std::string var;
  std::string ctr;  // empty for int/bool variables
  std::string head;
};

struct ClassInfo {
  const ast::StateDecl* decl = nullptr;
  std::map<std::string, const ast::MethodDecl*> methods;
  std::map<std::string, const ast::FieldDecl*> fields;
};

struct Family {
  const ast::PtsDef* def = nullptr;
  std::string owner;
};

/// Names a contract formula may mention.
struct Binding {
  const Obj* pre = nullptr;
  const Obj* post = nullptr;
  std::string sym;  // int/bool parameter
};

class Checker {
 public:
  Checker(const ast::Program& p, const Options& o, Report& r) : prog_(p), opts_(o), rep_(r) {
    deadline_ = Clock::now() + o.timeout;
    lim_.max_atoms = o.max_atoms;
    lim_.per_query = o.timeout;
    lim_.deadline = deadline_;
    sink_ = &rep_.diagnostics;
  }

  void run();

 private:
  const ast::Program& prog_;
  Options opts_;
  Report& rep_;
  Clock::time_point deadline_;
  pa::Limits lim_;
  types::StateHierarchy h_;
  std::map<std::string, ClassInfo> classes_;
  std::map<std::string, Family> families_;
  int counter_ = 0;

  // Per method.
  std::string method_;
  const ast::MethodDecl* decl_ = nullptr;
  std::string owner_;
  std::set<std::string> pinned_;
  std::set<std::string> keep_;  // loop head symbols, live across the body
  std::map<std::string, std::string> pinned_display_;
  std::map<std::string, std::string> arg_display_;  // call argument symbols, shown as method.param
  std::map<std::string, Obj> entry_objs_;
  std::map<std::string, std::string> entry_syms_;
  std::vector<std::pair<std::size_t, std::size_t>> open_loops_;  // (log index, diagnostics at exit)

  std::vector<Diagnostic>* sink_;  // null: obligations are assumed, not checked
  bool logging() const { return sink_ == &rep_.diagnostics; }

  std::string fresh(const std::string& base) { return base + "#" + std::to_string(++counter_); }

  void diag(const Span& sp, const std::string& rule, const std::string& msg) {
    if (!sink_) return;
    Diagnostic d;
    d.span = sp;
    d.method = method_;
    d.rule = rule;
    d.message = msg;
    sink_->push_back(std::move(d));
  }

  std::map<std::string, std::string> display(St& st) const;
  bool oblige(St& st, const Formula& goal, const Span& sp, const std::string& rule, const std::string& msg,
              bool assume_after = true);
  void tidy(St& st);

  // Types.
  bool known_state(const std::string& s) const { return h_.contains(s) && s != types::kBottom; }
  const Family* family(const std::string& n) const {
    auto it = families_.find(n);
    return it == families_.end() ? nullptr : &it->second;
  }
  const ast::MethodDecl* lookup_method(const std::string& cls, const std::string& m) const;
  const ast::FieldDecl* lookup_field(const std::string& cls, const std::string& f) const;
  bool check_type_expr(const TypeExpr& t);
  Obj make_pts(const TypeExpr& t, const std::string& cls, const std::string& prefix, bool pinned);
  Formula bind_contract(const Formula& f, const std::map<std::string, Binding>& names, const std::string& subject,
                        const Span& sp, const std::string& rule);
  bool fits(St& st, const Val& v, const TypeExpr& t, const Span& sp, const std::string& rule, const std::string& what);

  // Expressions.
  Val eval(const Expr& e, St& st);
  Val eval_binary(const Expr& e, St& st);
  Val eval_call(const Expr& e, St& st);
  Val this_val(St& st, const Span& sp);
  std::optional<Formula> eval_cond(const Expr& e, St& st);
  Val fresh_value(const TypeExpr& t, St& st, const Span& sp);

  // Statements.
  void exec(const Stmt& s, St& st);
  void exec_block(const ast::Block& b, St& st);
  void exec_decl(const Stmt& s, St& st);
  void exec_assign(const Stmt& s, St& st);
  void exec_update(const Stmt& s, St& st);
  void exec_match(const Stmt& s, St& st);
  void exec_while(const Stmt& s, St& st);
  void exec_return(const Stmt& s, St& st);
  Var bind_value(const Val& v, St& st, const std::string& name, bool is_val, const Span& sp);
  St join(const St& base, std::vector<St> branches);
  void check_posts(St& st, const Span& sp);

  // Loops.
  struct Accel {
    bool ok = false;
    Formula inv;
    std::string reason;
  };
  struct LoopOutcome {
    St exit;
    bool entry = false;
    bool step = false;
    std::string formula;
  };
  Accel accelerate(const Stmt& s, St& st, const St& head, const std::vector<Slot>& slots,
                   const std::map<std::string, std::string>& to_head);
  std::optional<std::map<std::string, std::string>> resolve_source(const Formula& f, St& st, const Span& sp);
  LoopOutcome annotated(const Stmt& s, St& st, const St& head, const Formula& outer,
                        std::vector<Diagnostic>* body_sink);
  void check_loop_states(const Stmt& s, St& end, const St& head);

  // Methods.
  void check_method(const ast::MethodDecl& m, const std::string& owner);
  void check_main();
  void build();
};

// ------------------------------------------------------------------ utilities

std::map<std::string, std::string> Checker::display(St& st) const {
  std::map<std::string, std::string> out = pinned_display_;
  std::set<std::string> taken;
  for (const auto& [s, n] : out) taken.insert(n);
  for (auto it = st.scopes.rbegin(); it != st.scopes.rend(); ++it)
    for (const auto& [name, v] : *it) {
      auto put = [&](const std::string& sym, const std::string& shown) {
        if (sym.empty()) return;
        auto cur = out.find(sym);
        if (cur != out.end() && !pinned_display_.count(sym)) return;
        if (taken.count(shown)) return;
        if (cur != out.end()) taken.erase(cur->second);
        out[sym] = shown;
        taken.insert(shown);
      };
      put(v.sym, name);
      for (const auto& [c, s] : v.obj.ctr) put(s, name + "." + c);
    }
  for (const auto& [sym, shown] : arg_display_)
    if (!out.count(sym) && !taken.count(shown)) {
      out[sym] = shown;
      taken.insert(shown);
    }
  return out;
}

bool Checker::oblige(St& st, const Formula& goal, const Span& sp, const std::string& rule, const std::string& msg,
                     bool assume_after) {
  if (st.dead()) return true;
  bool ok = true;
  if (sink_) {
    Formula ob = Formula::implies(st.phi, goal);
    ok = pa::is_valid(ob, lim_);
    if (!ok) {
      Formula shown = ob.rename(display(st));
      Diagnostic d;
      d.span = sp;
      d.method = method_;
      d.rule = rule;
      d.message = msg;
      d.obligation = shown.str();
      d.formula = shown;
      d.countermodel = pa::is_satisfiable(Formula::negate(shown), lim_).model;
      sink_->push_back(std::move(d));
    }
  }
  if (assume_after) st.assume(goal);
  return ok;
}

void Checker::tidy(St& st) {
  if (st.dead()) return;
  auto live = st.symbols();
  std::vector<std::string> dead;
  for (const auto& v : st.phi.free_vars())
    if (!live.count(v) && !pinned_.count(v) && !keep_.count(v)) dead.push_back(v);
  if (!dead.empty()) st.phi = pa::simplify(pa::project(st.phi, dead, lim_));
}

const ast::MethodDecl* Checker::lookup_method(const std::string& cls, const std::string& m) const {
  if (!h_.contains(cls)) return nullptr;
  for (const auto& c : h_.ancestors(cls)) {
    auto it = classes_.find(c);
    if (it == classes_.end()) continue;
    auto f = it->second.methods.find(m);
    if (f != it->second.methods.end()) return f->second;
  }
  return nullptr;
}

const ast::FieldDecl* Checker::lookup_field(const std::string& cls, const std::string& fname) const {
  if (!h_.contains(cls)) return nullptr;
  for (const auto& c : h_.ancestors(cls)) {
    auto it = classes_.find(c);
    if (it == classes_.end()) continue;
    auto f = it->second.fields.find(fname);
    if (f != it->second.fields.end()) return f->second;
  }
  return nullptr;
}

bool Checker::check_type_expr(const TypeExpr& t) {
  if (t.kind == TypeExpr::Kind::State && !known_state(t.name)) {
    diag(t.span, "T-var", "unknown state '" + t.name + "'");
    return false;
  }
  if (t.kind != TypeExpr::Kind::Pts) return true;
  const Family* f = family(t.name);
  if (!f) {
    diag(t.span, "T-Pts-I", "unknown p-typestate family '" + t.name + "'");
    return false;
  }
  bool ok = true;
  if (!known_state(t.state)) {
    diag(t.span, "T-Pts-I", "unknown state '" + t.state + "'");
    ok = false;
  } else if (!h_.leq(t.state, f->def->sort)) {
    diag(t.span, "T-Pts-I", "state " + t.state + " is not in the sort " + f->def->sort + " of family " + t.name);
    ok = false;
  }
  return ok;
}

Obj Checker::make_pts(const TypeExpr& t, const std::string& cls, const std::string& prefix, bool pinned) {
  Obj o;
  o.cls = cls;
  o.state = t.state;
  o.pts = true;
  o.family = t.name;
  o.perm = t.perm == ast::Perm::Immutable ? ast::Perm::Immutable : ast::Perm::Unique;
  if (const Family* f = family(t.name))
    for (const auto& c : f->def->vars) {
      std::string s = pinned ? prefix + "." + c + "#0" : fresh(prefix + "." + c);
      o.ctr[c] = s;
      if (pinned) {
        pinned_.insert(s);
        pinned_display_[s] = prefix + "." + c + "@pre";
      }
    }
  return o;
}

Formula Checker::bind_contract(const Formula& f, const std::map<std::string, Binding>& names,
                               const std::string& subject, const Span& sp, const std::string& rule) {
  std::map<std::string, std::string> ren;
  for (const auto& n : f.free_vars()) {
    bool primed = false;
    std::string b = strip_primes(n, primed);
    std::string who = subject, c = b;
    auto dot = b.find('.');
    if (dot != std::string::npos) {
      who = b.substr(0, dot);
      c = b.substr(dot + 1);
    }
    auto it = names.find(who);
    const Obj* o = nullptr;
    if (it != names.end()) o = primed ? it->second.post : it->second.pre;
    if (dot == std::string::npos && (!o || !o->ctr.count(c))) {
      // An int/bool parameter named directly.
      auto p = names.find(b);
      if (p != names.end() && !p->second.sym.empty() && !primed) {
        ren[n] = p->second.sym;
        continue;
      }
    }
    if (!o || !o->ctr.count(c)) {
      diag(sp, rule, "contract mentions '" + n + "', which is not a counter in scope");
      ren[n] = fresh("unbound");
      continue;
    }
    ren[n] = o->ctr.at(c);
  }
  return f.rename(ren);
}

// ---------------------------------------------------------------- expressions

Val Checker::this_val(St& st, const Span& sp) {
  Var* t = st.find("this");
  if (!t) {
    diag(sp, "T-var", "'this' is not available in main");
    return error_val();
  }
  Val v{Val::Kind::Object};
  v.obj = t->obj;
  v.var = "this";
  return v;
}

Val Checker::fresh_value(const TypeExpr& t, St& st, const Span& sp) {
  Val v;
  switch (t.kind) {
    case TypeExpr::Kind::Void: v.kind = Val::Kind::Void; break;
    case TypeExpr::Kind::Int: v.kind = Val::Kind::Int; v.term = LinearTerm::var(fresh("ret")); break;
    case TypeExpr::Kind::Bool: v.kind = Val::Kind::Bool; break;
    case TypeExpr::Kind::String: v.kind = Val::Kind::String; break;
    case TypeExpr::Kind::State:
      v.kind = Val::Kind::Object;
      v.obj.cls = v.obj.state = t.name;
      break;
    case TypeExpr::Kind::Pts: {
      if (!family(t.name)) return error_val();
      v.kind = Val::Kind::Object;
      v.obj = make_pts(t, family(t.name)->owner, "ret", false);
      std::map<std::string, Binding> names{{"", Binding{&v.obj, &v.obj, {}}}};
      st.assume(bind_contract(t.constraint(), names, "", sp, "T-mcall"));
      break;
    }
    case TypeExpr::Kind::Wildcard: v.kind = Val::Kind::Error; break;
  }
  return v;
}

std::optional<Formula> Checker::eval_cond(const Expr& e, St& st) {
  Val v = eval(e, st);
  if (v.kind == Val::Kind::Bool) return v.cond;
  if (v.kind != Val::Kind::Error) diag(e.span, "T-op", "condition is not a boolean");
  return std::nullopt;
}

Val Checker::eval(const Expr& e, St& st) {
  switch (e.kind) {
    case Expr::Kind::Int: return Val{Val::Kind::Int, LinearTerm(e.int_value)};
    case Expr::Kind::Bool: {
      Val v{Val::Kind::Bool};
      v.cond = Formula::truth(e.bool_value);
      return v;
    }
    case Expr::Kind::String: return Val{Val::Kind::String};
    case Expr::Kind::Var: {
      if (e.text == "this") return this_val(st, e.span);
      Var* x = st.find(e.text);
      if (!x) {
        diag(e.span, "T-var", "unknown variable '" + e.text + "'");
        return error_val();
      }
      if (x->moved) {
        diag(e.span, "T-perm", "'" + e.text + "' was moved into another unique reference");
        return error_val();
      }
      Val v;
      switch (x->kind) {
        case Var::Kind::Int: v.kind = Val::Kind::Int; v.term = LinearTerm::var(x->sym); break;
        case Var::Kind::Bool:
          v.kind = Val::Kind::Bool;
          v.cond = Formula::eq(LinearTerm::var(x->sym), LinearTerm(1));
          break;
        case Var::Kind::String: v.kind = Val::Kind::String; break;
        case Var::Kind::Object:
          v.kind = Val::Kind::Object;
          v.obj = x->obj;
          v.var = e.text;
          break;
      }
      return v;
    }
    case Expr::Kind::Field: {
      Val t = eval(*e.operands[0], st);
      if (t.kind == Val::Kind::Error) return t;
      if (t.kind != Val::Kind::Object) {
        diag(e.span, "T-fref", "field access on a non-object");
        return error_val();
      }
      const ast::FieldDecl* f = lookup_field(t.obj.cls, e.text);
      if (!f) {
        diag(e.span, "T-fref", "state " + t.obj.cls + " has no field '" + e.text + "'");
        return error_val();
      }
      if (f->type.kind == TypeExpr::Kind::Pts) {
        diag(e.span, "T-fref", "p-typestate fields are not supported");
        return error_val();
      }
      if (f->type.kind == TypeExpr::Kind::Wildcard) return error_val();
      return fresh_value(f->type, st, e.span);
    }
    case Expr::Kind::Call: return eval_call(e, st);
    case Expr::Kind::New: {
      if (!known_state(e.text)) {
        diag(e.span, "T-new", "unknown state '" + e.text + "'");
        return error_val();
      }
      for (const auto& init : e.inits) {
        Val iv = eval(*init.value, st);
        const ast::FieldDecl* f = lookup_field(e.text, init.name);
        if (!f)
          diag(init.value->span, "T-new", "state " + e.text + " has no field '" + init.name + "'");
        else if (iv.kind != Val::Kind::Error)
          fits(st, iv, f->type, init.value->span, "T-new", "field " + init.name);
      }
      Val v{Val::Kind::Object};
      v.obj.cls = v.obj.state = e.text;
      v.made_by = &e;
      return v;
    }
    case Expr::Kind::Unary: {
      Val a = eval(*e.operands[0], st);
      if (a.kind == Val::Kind::Error) return a;
      if (e.text == "-") {
        if (a.kind != Val::Kind::Int) {
          diag(e.span, "T-op", "'-' needs an int");
          return error_val();
        }
        return Val{Val::Kind::Int, -a.term};
      }
      if (a.kind != Val::Kind::Bool) {
        diag(e.span, "T-op", "'" + e.text + "' needs a bool");
        return error_val();
      }
      if (a.cond) a.cond = Formula::negate(*a.cond);
      return a;
    }
    case Expr::Kind::Binary: return eval_binary(e, st);
  }
  return error_val();
}

Val Checker::eval_binary(const Expr& e, St& st) {
  Val a = eval(*e.operands[0], st);
  Val b = eval(*e.operands[1], st);
  if (a.kind == Val::Kind::Error || b.kind == Val::Kind::Error) return error_val();
  const std::string& op = e.text;
  Val out;
  auto bad = [&](const std::string& what) {
    diag(e.span, "T-op", "'" + op + "' " + what);
    return error_val();
  };
  if (op == "&&" || op == "and" || op == "||" || op == "or") {
    if (a.kind != Val::Kind::Bool || b.kind != Val::Kind::Bool) return bad("needs bool operands");
    out.kind = Val::Kind::Bool;
    bool conj = op == "&&" || op == "and";
    if (a.cond && b.cond) out.cond = conj ? Formula::conj({*a.cond, *b.cond}) : Formula::disj({*a.cond, *b.cond});
    return out;
  }
  if (op == "==" || op == "!=") {
    out.kind = Val::Kind::Bool;
    if (a.kind != b.kind) return bad("compares values of different types");
    if (a.kind == Val::Kind::Int) out.cond = Formula::eq(a.term, b.term);
    else if (a.kind == Val::Kind::Bool && a.cond && b.cond) out.cond = Formula::iff(*a.cond, *b.cond);
    if (out.cond && op == "!=") out.cond = Formula::negate(*out.cond);
    return out;
  }
  if (a.kind != Val::Kind::Int || b.kind != Val::Kind::Int) return bad("needs int operands");
  if (op == "<" || op == "<=" || op == ">" || op == ">=") {
    out.kind = Val::Kind::Bool;
    pa::AtomKind k = op == "<" ? pa::AtomKind::LT : op == "<=" ? pa::AtomKind::LE
                   : op == ">" ? pa::AtomKind::GT : pa::AtomKind::GE;
    out.cond = Formula::cmp(k, a.term, b.term);
    return out;
  }
  out.kind = Val::Kind::Int;
  if (op == "+") out.term = a.term + b.term;
  else if (op == "-") out.term = a.term - b.term;
  else if (op == "*") {
    if (a.term.is_constant()) out.term = b.term * a.term.constant();
    else if (b.term.is_constant()) out.term = a.term * b.term.constant();
    else out.term = LinearTerm::var(fresh("nonlinear"));
  } else if (op == "/" || op == "%") {
    if (!b.term.is_constant()) {
      out.term = LinearTerm::var(fresh("nonlinear"));
      return out;
    }
    pa::Int c = b.term.constant();
    if (c == 0) return bad("divides by zero");
    // floor(t / c) = floor(-t / -c)
    LinearTerm t = c < 0 ? -a.term : a.term;
    pa::Int d = c < 0 ? -c : c;
    std::string q = fresh("quot");
    LinearTerm qt = LinearTerm::var(q);
    st.assume(Formula::conj({Formula::le(qt * d, t), Formula::le(t, qt * d + LinearTerm(d - 1))}));
    out.term = op == "/" ? qt : a.term - qt * c;
  } else {
    return bad("is not an operator");
  }
  return out;
}

bool Checker::fits(St& st, const Val& v, const TypeExpr& t, const Span& sp, const std::string& rule,
                   const std::string& what) {
  if (v.kind == Val::Kind::Error) return false;
  auto mismatch = [&](const std::string& expected) {
    diag(sp, rule, what + " expects " + expected);
    return false;
  };
  switch (t.kind) {
    case TypeExpr::Kind::Wildcard: return true;
    case TypeExpr::Kind::Void: return v.kind == Val::Kind::Void || mismatch("no value");
    case TypeExpr::Kind::Int: return v.kind == Val::Kind::Int || mismatch("an int");
    case TypeExpr::Kind::Bool: return v.kind == Val::Kind::Bool || mismatch("a bool");
    case TypeExpr::Kind::String: return v.kind == Val::Kind::String || mismatch("a string");
    case TypeExpr::Kind::State:
      if (v.kind != Val::Kind::Object) return mismatch("an object in state " + t.name);
      if (!h_.leq(v.obj.state, t.name)) return mismatch("state " + t.name + " but has " + v.obj.state);
      return true;
    case TypeExpr::Kind::Pts: {
      if (v.kind != Val::Kind::Object || !v.obj.pts || v.obj.family != t.name)
        return mismatch("p-typestate " + t.name);
      bool ok = true;
      if (!h_.leq(v.obj.state, t.state)) ok = mismatch("state " + t.state + " but has " + v.obj.state);
      if (t.perm == ast::Perm::Unique && v.obj.perm == ast::Perm::Immutable) {
        diag(sp, "T-perm", what + " needs a unique reference");
        ok = false;
      }
      std::map<std::string, Binding> names{{"", Binding{&v.obj, nullptr, {}}}};
      Formula goal = bind_contract(t.constraint(), names, "", sp, rule);
      ok = oblige(st, goal, sp, rule, what + ": constraint " + t.constraint().str() + " does not hold") && ok;
      return ok;
    }
  }
  return true;
}

Val Checker::eval_call(const Expr& e, St& st) {
  Val recv = e.has_receiver ? eval(*e.receiver(), st) : this_val(st, e.span);
  std::vector<Val> args;
  auto call_args = e.call_args();
  for (const auto& a : call_args) args.push_back(eval(*a, st));
  if (recv.kind == Val::Kind::Error) return error_val();
  if (recv.kind != Val::Kind::Object) {
    diag(e.span, "T-mcall", "method call on a non-object");
    return error_val();
  }
  const ast::MethodDecl* m = lookup_method(recv.obj.cls, e.text);
  if (!m) {
    diag(e.span, "T-mcall", "state " + recv.obj.cls + " has no method '" + e.text + "'");
    return error_val();
  }
  if (m->params.size() != args.size()) {
    diag(e.span, "T-mcall", e.text + " takes " + std::to_string(m->params.size()) + " arguments");
    return error_val();
  }
  for (std::size_t i = 1; i < m->env.size(); ++i)
    diag(m->env[i].span, "T-mcall", "environment contracts on names other than the receiver are not supported");

  const std::string where = "call to " + e.text;
  const ast::EnvContract* rc = m->receiver_contract();

  // Typestate and permission premises.
  bool ok = true;
  if (rc) {
    const TypeExpr& pre = rc->pre;
    if (pre.kind == TypeExpr::Kind::Pts) {
      if (!recv.obj.pts || recv.obj.family != pre.name) {
        diag(e.span, "T-mcall", where + ": receiver is not a " + pre.name + " p-typestate");
        return fresh_value(m->return_type, st, e.span);
      }
      if (!h_.leq(recv.obj.state, pre.state)) {
        diag(e.span, "T-mcall", where + ": receiver is in state " + recv.obj.state + ", expected " + pre.state);
        ok = false;
      }
      if (pre.perm != ast::Perm::Immutable && recv.obj.perm == ast::Perm::Immutable) {
        diag(e.span, "T-perm", where + ": receiver is immutable but the contract needs a unique reference");
        ok = false;
      }
    } else if (pre.kind == TypeExpr::Kind::State && !h_.leq(recv.obj.state, pre.name)) {
      diag(e.span, "T-mcall", where + ": receiver is in state " + recv.obj.state + ", expected " + pre.name);
      ok = false;
    }
  }

  // Pre and post objects for every subject.
  std::map<std::string, Binding> names;
  std::vector<Obj> posts(args.size() + 1);
  Obj& rpost = posts[0];
  rpost = recv.obj;
  if (rc && rc->pre.kind == TypeExpr::Kind::Pts && rc->post.kind == TypeExpr::Kind::Pts) {
    for (auto& [c, s] : rpost.ctr) s = fresh((recv.var.empty() ? "tmp" : recv.var) + "." + c);
    rpost.state = rc->post.state;
  } else if (rc && rc->post.kind == TypeExpr::Kind::State) {
    rpost.state = rc->post.name;
  }
  names["this"] = Binding{&recv.obj, &rpost, {}};
  for (std::size_t i = 0; i < args.size(); ++i) {
    const ast::Param& p = m->params[i];
    Val& a = args[i];
    if (!fits(st, a, p.type, call_args[i]->span, "T-mcall", where + ", argument '" + p.name + "'")) ok = false;
    Binding b;
    if (a.kind == Val::Kind::Int) {
      std::string s = fresh(p.name);
      std::erase_if(arg_display_, [&](const auto& kv) { return kv.second == e.text + "." + p.name; });
      arg_display_[s] = e.text + "." + p.name;
      st.assume(Formula::eq(LinearTerm::var(s), a.term));
      b.sym = s;
    } else if (a.kind == Val::Kind::Object) {
      posts[i + 1] = a.obj;
      if (p.post && p.type.kind == TypeExpr::Kind::Pts && p.post->kind == TypeExpr::Kind::Pts && a.obj.pts) {
        for (auto& [c, s] : posts[i + 1].ctr) s = fresh((a.var.empty() ? p.name : a.var) + "." + c);
        posts[i + 1].state = p.post->state;
      } else if (p.post && p.post->kind == TypeExpr::Kind::State) {
        posts[i + 1].state = p.post->name;
      }
      b.pre = &a.obj;
      b.post = &posts[i + 1];
    }
    names[p.name] = b;
  }

  // Precondition: the receiver's pre formula (parameter pre formulas were
  // checked by fits above).
  if (rc && rc->pre.kind == TypeExpr::Kind::Pts) {
    Formula pre = bind_contract(rc->pre.constraint(), names, "this", e.span, "T-mcall");
    for (const auto& n : rc->pre.constraint().free_vars())
      if (n.back() == '\'') diag(rc->pre.span, "T-mcall", "primed name '" + n + "' in a precondition");
    ok = oblige(st, pre, e.span, "T-mcall",
                where + ": precondition " + rc->pre.constraint().str() + " may not hold") && ok;
  }
  (void)ok;

  // Postcondition relation.
  std::vector<Formula> rel;
  if (rc && rc->post.kind == TypeExpr::Kind::Pts && rc->pre.kind == TypeExpr::Kind::Pts)
    rel.push_back(bind_contract(rc->post.constraint(), names, "this", e.span, "T-mcall"));
  for (std::size_t i = 0; i < args.size(); ++i) {
    const ast::Param& p = m->params[i];
    if (p.post && p.post->kind == TypeExpr::Kind::Pts && args[i].kind == Val::Kind::Object && args[i].obj.pts)
      rel.push_back(bind_contract(p.post->constraint(), names, p.name, e.span, "T-mcall"));
  }
  Formula post = Formula::conj(rel);

  // Immutable references keep their typestate.
  auto frozen = [&](const Obj& pre_o, const Obj& post_o, const std::string& who) {
    if (!pre_o.pts || pre_o.perm != ast::Perm::Immutable) return;
    std::vector<Formula> same;
    for (const auto& [c, s] : pre_o.ctr) same.push_back(Formula::eq(LinearTerm::var(s), LinearTerm::var(post_o.ctr.at(c))));
    bool keeps = pre_o.state == post_o.state;
    if (keeps && sink_) keeps = pa::is_valid(Formula::implies(Formula::conj({st.phi, post}), Formula::conj(same)), lim_);
    if (!keeps) diag(e.span, "T-perm", where + " may change the typestate of immutable " + who);
  };
  frozen(recv.obj, rpost, recv.var.empty() ? "receiver" : recv.var);
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i].kind == Val::Kind::Object) frozen(args[i].obj, posts[i + 1], m->params[i].name);

  st.assume(post);
  auto rebind = [&](const std::string& var, const Obj& o) {
    if (var.empty()) return;
    if (Var* x = st.find(var)) x->obj = o;
  };
  rebind(recv.var, rpost);
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i].kind == Val::Kind::Object) rebind(args[i].var, posts[i + 1]);
  return fresh_value(m->return_type, st, e.span);
}

// ----------------------------------------------------------------- statements

Var Checker::bind_value(const Val& v, St& st, const std::string& name, bool is_val, const Span& sp) {
  Var x;
  x.is_val = is_val;
  switch (v.kind) {
    case Val::Kind::Int:
      x.kind = Var::Kind::Int;
      x.sym = fresh(name);
      st.assume(Formula::eq(LinearTerm::var(x.sym), v.term));
      break;
    case Val::Kind::Bool: {
      x.kind = Var::Kind::Bool;
      x.sym = fresh(name);
      LinearTerm s = LinearTerm::var(x.sym);
      std::vector<Formula> fs{Formula::ge(s, LinearTerm(0)), Formula::le(s, LinearTerm(1))};
      if (v.cond) fs.push_back(Formula::iff(Formula::eq(s, LinearTerm(1)), *v.cond));
      st.assume(Formula::conj(fs));
      break;
    }
    case Val::Kind::String: x.kind = Var::Kind::String; break;
    case Val::Kind::Object:
      x.kind = Var::Kind::Object;
      x.obj = v.obj;
      if (v.obj.pts && !v.var.empty() && v.obj.perm == ast::Perm::Unique) {
        // Aliasing a unique reference leaves two immutable ones.
        if (Var* src = st.find(v.var)) src->obj.perm = ast::Perm::Immutable;
        x.obj.perm = ast::Perm::Immutable;
      }
      break;
    case Val::Kind::Void:
      diag(sp, "T-var", "expression has no value");
      [[fallthrough]];
    case Val::Kind::Error:
      x.kind = Var::Kind::Int;
      x.sym = fresh(name);
      break;
  }
  return x;
}

void Checker::exec_block(const ast::Block& b, St& st) {
  st.scopes.emplace_back();
  for (const auto& s : b) {
    if (st.dead()) break;
    exec(*s, st);
  }
  st.scopes.pop_back();
}

void Checker::exec(const Stmt& s, St& st) {
  if (st.dead()) return;
  switch (s.kind) {
    case Stmt::Kind::VarDecl: exec_decl(s, st); break;
    case Stmt::Kind::Let: {
      Val v = eval(*s.init, st);
      st.scopes.emplace_back();
      st.scopes.back()[s.name] = bind_value(v, st, s.name, true, s.span);
      for (const auto& b : s.body) exec(*b, st);
      st.scopes.pop_back();
      break;
    }
    case Stmt::Kind::Assign: exec_assign(s, st); break;
    case Stmt::Kind::Update: exec_update(s, st); break;
    case Stmt::Kind::Match: exec_match(s, st); break;
    case Stmt::Kind::While: exec_while(s, st); break;
    case Stmt::Kind::Skip: break;
    case Stmt::Kind::Return: exec_return(s, st); break;
    case Stmt::Kind::Print:
    case Stmt::Kind::Expr: eval(*s.init, st); break;
    case Stmt::Kind::Block: exec_block(s.body, st); break;
  }
  tidy(st);
}

void Checker::exec_decl(const Stmt& s, St& st) {
  if (st.scopes.back().count(s.name)) diag(s.span, "T-var", "'" + s.name + "' is already declared in this scope");
  if (!s.type || s.type->kind == TypeExpr::Kind::Wildcard) {
    if (!s.init) {
      diag(s.span, "T-var", "'" + s.name + "' needs a type or an initializer");
      st.scopes.back()[s.name] = bind_value(error_val(), st, s.name, s.is_val, s.span);
      return;
    }
    Val v = eval(*s.init, st);
    st.scopes.back()[s.name] = bind_value(v, st, s.name, s.is_val, s.span);
    return;
  }
  const TypeExpr& t = *s.type;
  bool type_ok = check_type_expr(t);
  if (!s.init) {
    Val v;
    switch (t.kind) {
      case TypeExpr::Kind::Int: v = Val{Val::Kind::Int, LinearTerm(0)}; break;
      case TypeExpr::Kind::Bool: v.kind = Val::Kind::Bool; v.cond = Formula::truth(false); break;
      case TypeExpr::Kind::String: v.kind = Val::Kind::String; break;
      case TypeExpr::Kind::State: v.kind = Val::Kind::Object; v.obj.cls = v.obj.state = t.name; break;
      default:
        if (t.kind == TypeExpr::Kind::Pts) diag(s.span, "T-Pts-C", "p-typestate variable '" + s.name + "' needs an initializer");
        else diag(s.span, "T-var", "'" + s.name + "' cannot have type void");
        v = error_val();
    }
    st.scopes.back()[s.name] = bind_value(v, st, s.name, s.is_val, s.span);
    return;
  }
  Val v = eval(*s.init, st);
  if (t.kind != TypeExpr::Kind::Pts || !type_ok || v.kind == Val::Kind::Error) {
    if (type_ok) fits(st, v, t, s.init->span, "T-var", "'" + s.name + "'");
    if (t.kind == TypeExpr::Kind::Pts) v = error_val();
    st.scopes.back()[s.name] = bind_value(v, st, s.name, s.is_val, s.span);
    return;
  }

  const Family& fam = *family(t.name);
  Var x;
  x.kind = Var::Kind::Object;
  x.is_val = s.is_val;
  if (v.made_by) {
    // Instantiation of a family at a fresh object.
    if (!h_.leq(v.obj.cls, fam.owner))
      diag(s.init->span, "T-Pts-C", "state " + v.obj.cls + " does not provide family " + t.name);
    std::set<std::string> vars(fam.def->vars.begin(), fam.def->vars.end());
    bool wf = true;
    for (const auto& n : t.constraint().free_vars())
      if (!vars.count(n)) {
        diag(t.span, "T-Pts-C", "'" + n + "' is not an index of family " + t.name);
        wf = false;
      }
    if (wf && fam.def->constraint) {
      St pure;
      oblige(pure, Formula::implies(t.constraint(), *fam.def->constraint), t.span, "T-Pts-C",
             "instance constraint does not imply the family constraint " + fam.def->constraint->str(), false);
    }
    x.obj = make_pts(t, v.obj.cls, s.name, false);
    std::map<std::string, Binding> names{{s.name, Binding{&x.obj, nullptr, {}}}};
    std::vector<Formula> fs{t.constraint()};
    for (const auto& c : v.made_by->constraint) fs.push_back(c);
    st.assume(bind_contract(Formula::conj(fs), names, s.name, s.span, "T-Pts-C"));
  } else {
    if (!fits(st, v, t, s.init->span, "T-var", "'" + s.name + "'")) {
      st.scopes.back()[s.name] = bind_value(error_val(), st, s.name, s.is_val, s.span);
      return;
    }
    x.obj = v.obj;
    x.obj.perm = t.perm == ast::Perm::Immutable ? ast::Perm::Immutable : ast::Perm::Unique;
    if (Var* src = v.var.empty() ? nullptr : st.find(v.var)) {
      if (x.obj.perm == ast::Perm::Immutable) src->obj.perm = ast::Perm::Immutable;
      else src->moved = true;
    }
  }
  st.scopes.back()[s.name] = x;
}

void Checker::exec_assign(const Stmt& s, St& st) {
  const Expr& tgt = *s.target;
  Val v = eval(*s.value, st);
  if (tgt.kind == Expr::Kind::Field) {
    Val o = eval(*tgt.operands[0], st);
    if (o.kind == Val::Kind::Error) return;
    if (o.kind != Val::Kind::Object) {
      diag(tgt.span, "T-fref", "field assignment on a non-object");
      return;
    }
    const ast::FieldDecl* f = lookup_field(o.obj.cls, tgt.text);
    if (!f) {
      diag(tgt.span, "T-fref", "state " + o.obj.cls + " has no field '" + tgt.text + "'");
      return;
    }
    if (f->is_val) diag(tgt.span, "T-fref", "field '" + tgt.text + "' is a val");
    if (f->type.kind == TypeExpr::Kind::Pts) {
      diag(tgt.span, "T-fref", "p-typestate fields are not supported");
      return;
    }
    fits(st, v, f->type, s.value->span, "T-fref", "field " + tgt.text);
    return;
  }
  if (tgt.kind != Expr::Kind::Var || tgt.text == "this") {
    diag(tgt.span, "T-var", "cannot assign to this expression");
    return;
  }
  Var* x = st.find(tgt.text);
  if (!x) {
    diag(tgt.span, "T-var", "unknown variable '" + tgt.text + "'");
    return;
  }
  if (x->is_val) diag(tgt.span, "T-var", "'" + tgt.text + "' is a val");
  if (v.kind == Val::Kind::Error) return;
  static const char* kinds[] = {"an int", "a bool", "a string", "an object"};
  bool same = (x->kind == Var::Kind::Int && v.kind == Val::Kind::Int) ||
              (x->kind == Var::Kind::Bool && v.kind == Val::Kind::Bool) ||
              (x->kind == Var::Kind::String && v.kind == Val::Kind::String) ||
              (x->kind == Var::Kind::Object && v.kind == Val::Kind::Object);
  if (!same) {
    diag(s.span, "T-var", "'" + tgt.text + "' holds " + kinds[static_cast<int>(x->kind)]);
    return;
  }
  if (x->kind == Var::Kind::Object && x->obj.pts) {
    if (!v.obj.pts || v.obj.family != x->obj.family) {
      diag(s.span, "T-var", "'" + tgt.text + "' holds a " + x->obj.family + " p-typestate");
      return;
    }
  }
  Var y = bind_value(v, st, tgt.text, x->is_val, s.span);
  if (x->kind == Var::Kind::Object && x->obj.pts && !v.var.empty() && v.obj.perm == ast::Perm::Unique) {
    // Assignment moves a unique reference.
    y.obj.perm = ast::Perm::Unique;
    if (Var* src = st.find(v.var)) {
      src->obj.perm = ast::Perm::Unique;
      src->moved = true;
    }
  }
  x = st.find(tgt.text);
  y.is_val = x->is_val;
  *x = y;
}

void Checker::exec_update(const Stmt& s, St& st) {
  const Expr& tgt = *s.target;
  const TypeExpr& t = *s.new_type;
  if (tgt.kind != Expr::Kind::Var) {
    diag(tgt.span, "T-update", "only variables and 'this' can change typestate");
    return;
  }
  Var* x = st.find(tgt.text);
  if (!x || x->kind != Var::Kind::Object) {
    diag(tgt.span, "T-update", "'" + tgt.text + "' is not an object in scope");
    return;
  }
  if (!check_type_expr(t)) return;
  if (t.kind == TypeExpr::Kind::State) {
    if (x->obj.pts) diag(t.span, "T-update", "'" + tgt.text + "' carries a p-typestate; give its family");
    else x->obj.state = t.name;
    return;
  }
  if (t.kind != TypeExpr::Kind::Pts) {
    diag(t.span, "T-update", "typestate change needs a state or p-typestate");
    return;
  }
  if (!x->obj.pts || x->obj.family != t.name) {
    diag(t.span, "T-update", "'" + tgt.text + "' is not a " + t.name + " p-typestate");
    return;
  }
  if (x->obj.perm == ast::Perm::Immutable) {
    diag(tgt.span, "T-perm", "'" + tgt.text + "' is immutable; its typestate cannot change");
    return;
  }
  Obj post = x->obj;
  for (auto& [c, sym] : post.ctr) sym = fresh(tgt.text + "." + c);
  post.state = t.state;
  // Other objects' counters and int/bool locals may appear unprimed.
  std::map<std::string, Binding> names;
  for (auto& scope : st.scopes)
    for (auto& [name, v] : scope) {
      if (v.kind == Var::Kind::Object && v.obj.pts) names[name] = Binding{&v.obj, nullptr, {}};
      else if ((v.kind == Var::Kind::Int || v.kind == Var::Kind::Bool) && !v.sym.empty())
        names[name] = Binding{nullptr, nullptr, v.sym};
      else names.erase(name);
    }
  names[tgt.text] = Binding{&x->obj, &post, {}};
  st.assume(bind_contract(t.constraint(), names, tgt.text, s.span, "T-update"));
  x->obj = post;
}

St Checker::join(const St& base, std::vector<St> branches) {
  std::vector<St> live;
  for (auto& b : branches) {
    if (b.dead()) continue;
    if (branches.size() > 1 && !pa::is_satisfiable(b.phi, lim_).sat) continue;
    live.push_back(std::move(b));
  }
  if (live.empty()) {
    St out = base;
    out.phi = Formula::truth(false);
    return out;
  }
  if (live.size() == 1) return live.front();
  St out = live.front();
  for (std::size_t k = 0; k < out.scopes.size(); ++k)
    for (auto& [name, v] : out.scopes[k]) {
      std::vector<Var*> vs;
      for (auto& b : live) vs.push_back(&b.scopes[k].at(name));
      auto merge_sym = [&](auto get, const std::string& base_name) {
        bool differ = false;
        for (Var* w : vs) differ = differ || get(*w) != get(*vs.front());
        if (!differ) return get(*vs.front());
        std::string j = fresh(base_name);
        for (std::size_t i = 0; i < live.size(); ++i)
          live[i].phi = Formula::conj({live[i].phi, Formula::eq(LinearTerm::var(j), LinearTerm::var(get(*vs[i])))});
        return j;
      };
      if (!v.sym.empty()) v.sym = merge_sym([](const Var& w) { return w.sym; }, name);
      if (v.kind != Var::Kind::Object) continue;
      for (auto& [c, sym] : v.obj.ctr)
        sym = merge_sym([&c = c](const Var& w) { return w.obj.ctr.at(c); }, name + "." + c);
      for (Var* w : vs) {
        v.obj.state = h_.meet(v.obj.state, w->obj.state);
        if (w->obj.perm == ast::Perm::Immutable) v.obj.perm = ast::Perm::Immutable;
        v.moved = v.moved || w->moved;
      }
    }
  std::vector<Formula> phis;
  for (auto& b : live) phis.push_back(b.phi);
  out.phi = pa::simplify(Formula::disj(phis));
  return out;
}

void Checker::exec_match(const Stmt& s, St& st) {
  std::vector<St> branches;
  if (!s.scrutinee) {
    std::vector<std::optional<Formula>> gs;
    for (const auto& arm : s.arms) gs.push_back(eval_cond(*arm.guard, st));
    bool all_known = true;
    std::vector<Formula> known;
    for (std::size_t i = 0; i < s.arms.size(); ++i) {
      St b = st;
      if (gs[i]) {
        b.assume(*gs[i]);
        known.push_back(*gs[i]);
      } else {
        all_known = false;
      }
      exec_block(s.arms[i].body, b);
      branches.push_back(std::move(b));
    }
    St d = st;
    if (all_known) d.assume(Formula::negate(Formula::disj(known)));
    exec_block(s.default_body, d);
    branches.push_back(std::move(d));
    st = join(st, std::move(branches));
    return;
  }
  Val v = eval(*s.scrutinee, st);
  if (v.kind == Val::Kind::Error) return;
  if (v.kind != Val::Kind::Object) {
    diag(s.scrutinee->span, "T-match", "match needs an object or '*'");
    return;
  }
  bool covered = false;
  for (const auto& arm : s.arms) {
    if (!known_state(arm.pattern_state)) {
      diag(arm.span, "T-match", "unknown state '" + arm.pattern_state + "'");
      continue;
    }
    if (covered) continue;
    bool sub = h_.leq(arm.pattern_state, v.obj.state);
    bool sup = h_.leq(v.obj.state, arm.pattern_state);
    if (!sub && !sup) continue;
    St b = st;
    if (sub && !v.var.empty())
      if (Var* x = b.find(v.var)) x->obj.state = arm.pattern_state;
    exec_block(arm.body, b);
    branches.push_back(std::move(b));
    if (sup) covered = true;
  }
  if (!covered) {
    St d = st;
    exec_block(s.default_body, d);
    branches.push_back(std::move(d));
  }
  st = join(st, std::move(branches));
}

void Checker::exec_return(const Stmt& s, St& st) {
  Val v = s.init ? eval(*s.init, st) : Val{Val::Kind::Void};
  fits(st, v, decl_->return_type, s.init ? s.init->span : s.span, "T-return", "return value of " + method_);
  check_posts(st, s.span);
  st.phi = Formula::truth(false);
}

void Checker::check_posts(St& st, const Span& sp) {
  if (st.dead() || !decl_->has_env) return;
  std::map<std::string, Binding> names;
  std::map<std::string, Obj> now;
  auto current = [&](const std::string& n) -> const Obj* {
    Var* x = st.find(n);
    if (!x || x->kind != Var::Kind::Object) return nullptr;
    return &(now[n] = x->obj);
  };
  for (const auto& [n, o] : entry_objs_) names[n] = Binding{&o, current(n), {}};
  for (const auto& [n, s] : entry_syms_) names[n].sym = s;

  auto check_one = [&](const std::string& who, const TypeExpr& pre, const TypeExpr& post) {
    const Obj* in = names[who].pre;
    const Obj* out = names[who].post;
    if (!in || !out) return;
    const std::string label = who == "this" ? "receiver" : "'" + who + "'";
    if (post.kind == TypeExpr::Kind::Wildcard) {
      if (out->state != in->state) diag(sp, "T-m Decl", label + " must keep its state " + in->state);
      std::vector<Formula> same;
      for (const auto& [c, s] : in->ctr) same.push_back(Formula::eq(LinearTerm::var(s), LinearTerm::var(out->ctr.at(c))));
      if (!same.empty())
        oblige(st, Formula::conj(same), sp, "T-m Decl", label + " must keep its counters", false);
      return;
    }
    if (post.kind == TypeExpr::Kind::State && !h_.leq(out->state, post.name))
      diag(sp, "T-m Decl", label + " ends in state " + out->state + ", contract promises " + post.name);
    if (post.kind != TypeExpr::Kind::Pts || pre.kind != TypeExpr::Kind::Pts) return;
    if (!h_.leq(out->state, post.state))
      diag(sp, "T-m Decl", label + " ends in state " + out->state + ", contract promises " + post.state);
    Formula goal = bind_contract(post.constraint(), names, who, sp, "T-m Decl");
    oblige(st, goal, sp, "T-m Decl",
           "postcondition " + post.constraint().str() + " of " + method_ + " may not hold for " + label, false);
  };
  if (const ast::EnvContract* rc = decl_->receiver_contract()) check_one("this", rc->pre, rc->post);
  for (const auto& p : decl_->params)
    if (p.post) check_one(p.name, p.type, *p.post);
}

// ---------------------------------------------------------------------- loops

namespace {

std::string slot_sym(St& st, const Slot& sl) {
  Var* x = st.find(sl.var);
  if (!x) return sl.head;
  if (sl.ctr.empty()) return x->sym;
  auto it = x->obj.ctr.find(sl.ctr);
  return it == x->obj.ctr.end() ? sl.head : it->second;
}

void collect_modified(const ast::Block& b, St& st, std::set<std::string>& out) {
  std::function<void(const Expr&)> ex = [&](const Expr& e) {
    if (e.kind == Expr::Kind::Call) {
      if (!e.has_receiver) out.insert("this");
      else if (e.receiver()->kind == Expr::Kind::Var) out.insert(e.receiver()->text);
      for (const auto& a : e.call_args())
        if (a->kind == Expr::Kind::Var)
          if (Var* x = st.find(a->text); x && x->kind == Var::Kind::Object) out.insert(a->text);
    }
    for (const auto& o : e.operands) ex(*o);
    for (const auto& i : e.inits) ex(*i.value);
  };
  std::function<void(const Stmt&)> sm = [&](const Stmt& s) {
    if ((s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::Update) && s.target->kind == Expr::Kind::Var)
      out.insert(s.target->text);
    for (const auto* e : {s.init.get(), s.target.get(), s.value.get(), s.scrutinee.get()})
      if (e) ex(*e);
    for (const auto& a : s.arms) {
      if (a.guard) ex(*a.guard);
      for (const auto& c : a.body) sm(*c);
    }
    for (const auto& c : s.default_body) sm(*c);
    for (const auto& c : s.body) sm(*c);
  };
  for (const auto& s : b) sm(*s);
}

struct KeepGuard {
  std::set<std::string>& keep;
  std::set<std::string> saved;
  KeepGuard(std::set<std::string>& k, const std::vector<Slot>& slots) : keep(k), saved(k) {
    for (const auto& sl : slots) keep.insert(sl.head);
  }
  ~KeepGuard() { keep = saved; }
};

struct SinkSwap {
  std::vector<Diagnostic>*& slot;
  std::vector<Diagnostic>* saved;
  SinkSwap(std::vector<Diagnostic>*& s, std::vector<Diagnostic>* with) : slot(s), saved(s) { slot = with; }
  ~SinkSwap() { slot = saved; }
};

}  // namespace

Checker::Accel Checker::accelerate(const Stmt& s, St& st, const St& head, const std::vector<Slot>& slots,
                                   const std::map<std::string, std::string>& to_head) {
  SinkSwap quiet(sink_, nullptr);
  KeepGuard kg(keep_, slots);
  Accel out;
  try {
    St x = head;
    x.phi = Formula::truth(true);
    if (auto c = eval_cond(*s.init, x)) x.assume(*c);
    Formula cond = x.phi;
    exec_block(s.body, x);

    std::set<std::string> hs;
    std::vector<Formula> rel{x.phi};
    for (const auto& sl : slots)
      if (hs.insert(sl.head).second)
        rel.push_back(Formula::eq(LinearTerm::var(counters::primed(sl.head)), LinearTerm::var(slot_sym(x, sl))));
    Formula r = Formula::conj(rel);

    // Counters: head symbols plus the outer symbols the loop reads.
    std::set<std::string> outer = st.symbols();
    outer.insert(pinned_.begin(), pinned_.end());
    for (const auto& [cur, h] : to_head) outer.erase(cur);
    std::set<std::string> cset = hs;
    for (const auto* f : {&r, &cond})
      for (const auto& v : f->free_vars())
        if (outer.count(v)) cset.insert(v);
    auto project_to = [&](const Formula& f, const std::set<std::string>& keep) {
      std::vector<std::string> drop;
      for (const auto& v : f.free_vars())
        if (!keep.count(v)) drop.push_back(v);
      return drop.empty() ? pa::simplify(f) : pa::simplify(pa::project(f, drop, lim_));
    };
    std::set<std::string> keep = cset;
    for (const auto& h : hs) keep.insert(counters::primed(h));
    r = project_to(r, keep);
    std::vector<Formula> frame{r};
    for (const auto& v : cset)
      if (!hs.count(v)) frame.push_back(Formula::eq(LinearTerm::var(counters::primed(v)), LinearTerm::var(v)));
    r = pa::simplify(Formula::conj(frame));

    // Slicing: a group of counters tied neither to the condition, nor to a
    // branch guard, nor to the other counters is dropped when its paths are
    // not translations. The invariant then says nothing about it, which is
    // sound.
    {
      Formula pcond = project_to(cond, cset);
      std::map<std::string, std::string> uf;
      std::function<std::string(const std::string&)> root = [&](const std::string& v) {
        auto it = uf.find(v);
        if (it == uf.end() || it->second == v) return uf[v] = v;
        return it->second = root(it->second);
      };
      auto base = [](std::string v) {
        while (!v.empty() && v.back() == '\'') v.pop_back();
        return v;
      };
      for (const auto& v : cset) root(v);
      std::vector<Formula> paths = dnf(r, 64);
      std::set<std::string> guarded;
      for (const auto& pth : paths)
        for (const auto& c : pa::conjuncts(pth)) {
          std::string first;
          bool guard = true;
          for (const auto& v : c.free_vars()) {
            if (base(v) != v) guard = false;
            if (first.empty()) first = root(base(v));
            else uf[root(base(v))] = first;
          }
          if (guard)
            for (const auto& v : c.free_vars()) guarded.insert(v);
        }
      std::set<std::string> tied;
      for (const auto& v : pcond.free_vars()) tied.insert(root(v));
      for (const auto& v : guarded) tied.insert(root(v));
      std::map<std::string, std::set<std::string>> groups;
      for (const auto& v : cset)
        if (!tied.count(root(v))) groups[root(v)].insert(v);
      std::set<std::string> dropped;
      for (const auto& [g, vars] : groups) {
        std::set<std::string> gk = vars;
        for (const auto& v : vars) gk.insert(counters::primed(v));
        counters::LoopSummary sub;
        sub.counters.assign(vars.begin(), vars.end());
        for (const auto& pth : paths) sub.paths.push_back({"p", project_to(pth, gk)});
        try {
          counters::extract_counter_system(sub, lim_);
        } catch (const counters::NonTranslationAction&) {
          dropped.insert(vars.begin(), vars.end());
        } catch (const counters::UnsupportedLoopShape&) {
          dropped.insert(vars.begin(), vars.end());
        }
      }
      if (!dropped.empty()) {
        for (const auto& v : dropped) cset.erase(v);
        std::set<std::string> kept = cset;
        for (const auto& v : cset) kept.insert(counters::primed(v));
        r = project_to(r, kept);
      }
    }

    std::vector<Formula> link{st.phi};
    for (const auto& [cur, h] : to_head) link.push_back(Formula::eq(LinearTerm::var(h), LinearTerm::var(cur)));

    counters::LoopSummary ls;
    ls.counters.assign(cset.begin(), cset.end());
    ls.entry = project_to(Formula::conj(link), cset);
    ls.condition = project_to(cond, cset);
    int i = 0;
    for (const auto& p : dnf(r, 64)) ls.paths.push_back({"path" + std::to_string(++i), p});
    auto cs = counters::extract_counter_system(ls, lim_);
    counters::ReachOptions ro;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline_ - Clock::now());
    ro.budget = std::max(left, std::chrono::milliseconds(1));
    auto rr = counters::compute_reach(cs, ro);
    if (!rr.reached) {
      out.reason = std::string(counters::to_string(rr.reason)) + (rr.detail.empty() ? "" : ": " + rr.detail);
      return out;
    }
    out.ok = true;
    out.inv = rr.regions.at(cs.initial_state);
  } catch (const counters::UnsupportedLoopShape& e) {
    out.reason = std::string("NonTranslationAction: ") + e.what();
  } catch (const counters::NonTranslationAction& e) {
    out.reason = std::string("NonTranslationAction: ") + e.what();
  } catch (const counters::CounterSystemError& e) {
    out.reason = std::string("NotFlattable: ") + e.what();
  } catch (const pa::BudgetExceeded& e) {
    out.reason = std::string("Timeout: ") + e.what();
  }
  return out;
}

std::optional<std::map<std::string, std::string>> Checker::resolve_source(const Formula& f, St& st,
                                                                           const Span& sp) {
  std::map<std::string, std::string> ren;
  for (const auto& n : f.free_vars()) {
    auto dot = n.find('.');
    Var* x = st.find(dot == std::string::npos ? n : n.substr(0, dot));
    std::string sym;
    if (x && dot == std::string::npos && (x->kind == Var::Kind::Int || x->kind == Var::Kind::Bool)) sym = x->sym;
    if (x && dot != std::string::npos && x->kind == Var::Kind::Object) {
      auto it = x->obj.ctr.find(n.substr(dot + 1));
      if (it != x->obj.ctr.end()) sym = it->second;
    }
    if (sym.empty()) {
      diag(sp, "T-while", "loop invariant mentions '" + n + "', which is not an int variable or counter in scope");
      return std::nullopt;
    }
    ren[n] = sym;
  }
  return ren;
}

Checker::LoopOutcome Checker::annotated(const Stmt& s, St& st, const St& head, const Formula& outer,
                                        std::vector<Diagnostic>* body_sink) {
  const Formula& inv = *s.invariant;
  LoopOutcome o;
  o.exit = head;
  auto at_entry = resolve_source(inv, st, s.span);
  auto at_head = resolve_source(inv, o.exit, s.span);
  if (!at_entry || !at_head) {
    o.exit.phi = outer;
    return o;
  }
  St in = st;
  o.entry = oblige(in, inv.rename(*at_entry), s.span, "T-while", "loop invariant does not hold on entry", false);
  {
    St b = head;
    b.phi = pa::simplify(Formula::conj({outer, inv.rename(*at_head)}));
    {
      SinkSwap swap(sink_, body_sink);
      if (auto c = eval_cond(*s.init, b)) b.assume(*c);
      exec_block(s.body, b);
      check_loop_states(s, b, head);
    }
    if (auto at_end = resolve_source(inv, b, s.span))
      o.step = oblige(b, inv.rename(*at_end), s.span, "T-while", "loop invariant is not preserved by the body", false);
  }
  o.exit.phi = pa::simplify(Formula::conj({outer, inv.rename(*at_head)}));
  if (auto c = eval_cond(*s.init, o.exit)) o.exit.assume(Formula::negate(*c));
  o.formula = inv.str();
  return o;
}

void Checker::check_loop_states(const Stmt& s, St& end, const St& head) {
  if (end.dead()) return;
  for (std::size_t k = 0; k < head.scopes.size() && k < end.scopes.size(); ++k)
    for (const auto& [name, v] : head.scopes[k]) {
      auto it = end.scopes[k].find(name);
      if (it == end.scopes[k].end() || v.kind != Var::Kind::Object) continue;
      if (!h_.leq(it->second.obj.state, v.obj.state))
        diag(s.span, "T-while", "'" + name + "' leaves the loop body in state " + it->second.obj.state +
                                    " but entered it in " + v.obj.state);
    }
}

void Checker::exec_while(const Stmt& s, St& st) {
  std::set<std::string> mod;
  collect_modified(s.body, st, mod);

  // Loop head: fresh symbols for everything the body may change.
  St head = st;
  std::map<std::string, std::string> to_head;
  std::vector<Slot> slots;
  for (const auto& name : mod) {
    Var* x = head.find(name);
    if (!x) continue;
    auto map_sym = [&](const std::string& cur, const std::string& base) {
      auto [it, fresh_one] = to_head.emplace(cur, "");
      if (fresh_one) it->second = fresh(base);
      return it->second;
    };
    if (!x->sym.empty()) slots.push_back({name, "", map_sym(x->sym, name)});
    for (const auto& [c, sym] : x->obj.ctr) slots.push_back({name, c, map_sym(sym, name + "." + c)});
  }
  for (auto& sc : head.scopes)
    for (auto& [n, v] : sc) {
      if (to_head.count(v.sym)) v.sym = to_head[v.sym];
      for (auto& [c, sym] : v.obj.ctr)
        if (to_head.count(sym)) sym = to_head[sym];
    }
  std::vector<std::string> cur_syms;
  for (const auto& [cur, h] : to_head) cur_syms.push_back(cur);
  Formula outer = cur_syms.empty() ? st.phi : pa::simplify(pa::project(st.phi, cur_syms, lim_));
  std::map<std::string, std::string> to_cur;
  for (const auto& [cur, h] : to_head) to_cur[h] = cur;

  const bool have_ann = s.invariant.has_value();
  InvariantRecord rec;
  bool no_invariant = false;
  rec.span = s.span;
  rec.method = method_;

  Accel acc;
  if (opts_.mode != InvariantMode::Annotated) acc = accelerate(s, st, head, slots, to_head);
  LoopOutcome result;
  if (acc.ok) {
    rec.mode = "accelerated";
    rec.formula = acc.inv.rename(display(head)).str();
    St in = st;
    rec.inductive_entry =
        oblige(in, acc.inv.rename(to_cur), s.span, "T-while", "computed loop invariant does not hold on entry", false);
    KeepGuard kg(keep_, slots);
    St b = head;
    b.phi = pa::simplify(Formula::conj({outer, acc.inv}));
    if (auto c = eval_cond(*s.init, b)) b.assume(*c);
    exec_block(s.body, b);
    check_loop_states(s, b, head);
    std::map<std::string, std::string> to_end;
    for (const auto& sl : slots) to_end[sl.head] = slot_sym(b, sl);
    rec.inductive_step = oblige(b, acc.inv.rename(to_end), s.span, "T-while",
                                "computed loop invariant is not preserved by the body", false);
    result.exit = head;
    result.exit.phi = pa::simplify(Formula::conj({outer, acc.inv}));
    if (auto c = eval_cond(*s.init, result.exit)) result.exit.assume(Formula::negate(*c));
    if (have_ann && opts_.mode == InvariantMode::Both) {
      // Agreement run: the annotation must be inductive too.
      std::vector<Diagnostic> scratch;
      LoopOutcome a = annotated(s, st, head, outer, &scratch);
      if (logging()) {
        InvariantRecord ar = rec;
        ar.mode = "annotated";
        ar.formula = a.formula;
        ar.inductive_entry = a.entry;
        ar.inductive_step = a.step;
        open_loops_.push_back({rep_.invariant_log.size(), 0});
        rep_.invariant_log.push_back(ar);
      }
    }
  } else if (have_ann && opts_.mode != InvariantMode::Accelerate) {
    if (logging() && opts_.mode == InvariantMode::Both) {
      InvariantRecord fr = rec;
      fr.mode = "accelerated";
      fr.detail = acc.reason;
      rep_.invariant_log.push_back(fr);
    }
    result = annotated(s, st, head, outer, sink_);
    rec.mode = "annotated";
    rec.formula = result.formula;
    rec.inductive_entry = result.entry;
    rec.inductive_step = result.step;
  } else {
    std::string why = opts_.mode == InvariantMode::Annotated ? "the loop has no invariant annotation"
                                                              : "acceleration failed (" + acc.reason + ")";
    if (have_ann) why += " and annotations are disabled";
    else if (opts_.mode != InvariantMode::Annotated) why += " and the loop has no invariant annotation";
    diag(s.span, "T-while", "no loop invariant: " + why);
    if (logging()) rep_.reason = "NeedsInvariant";
    rec.mode = "accelerated";
    rec.detail = acc.reason;
    no_invariant = true;
    result.exit = head;
    result.exit.phi = outer;
    if (auto c = eval_cond(*s.init, result.exit)) result.exit.assume(Formula::negate(*c));
  }
  if (logging()) {
    if (!no_invariant) open_loops_.push_back({rep_.invariant_log.size(), 0});
    rep_.invariant_log.push_back(rec);
    // Adequacy is settled at the end of the method: no failure after here.
    for (auto& ol : open_loops_)
      if (ol.second == 0) ol.second = rep_.diagnostics.size() + 1;
  }
  st = result.exit;
}

// -------------------------------------------------------------------- methods

void Checker::check_method(const ast::MethodDecl& m, const std::string& owner) {
  method_ = owner.empty() ? m.name : owner + "." + m.name;
  decl_ = &m;
  owner_ = owner;
  pinned_.clear();
  pinned_display_.clear();
  arg_display_.clear();
  entry_objs_.clear();
  entry_syms_.clear();
  open_loops_.clear();
  St st;
  try {
    if (!owner.empty()) {
      Obj self;
      self.cls = self.state = owner;
      const ast::EnvContract* rc = m.receiver_contract();
      for (std::size_t i = 1; i < m.env.size(); ++i)
        diag(m.env[i].span, "T-m Decl", "environment contracts on names other than the receiver are not supported");
      if (rc) {
        bool ok = check_type_expr(rc->pre) && check_type_expr(rc->post);
        if (ok && rc->pre.kind == TypeExpr::Kind::Pts) {
          if (rc->post.kind == TypeExpr::Kind::Pts && rc->post.name != rc->pre.name)
            diag(rc->span, "T-m Decl", "contract changes the family from " + rc->pre.name + " to " + rc->post.name);
          else if (rc->post.kind != TypeExpr::Kind::Pts && rc->post.kind != TypeExpr::Kind::Wildcard)
            diag(rc->span, "T-m Decl", "contract must end in a " + rc->pre.name + " p-typestate");
          self = make_pts(rc->pre, owner, "this", true);
        } else if (ok && rc->pre.kind == TypeExpr::Kind::State) {
          self.state = rc->pre.name;
        }
      }
      Var tv;
      tv.kind = Var::Kind::Object;
      tv.obj = self;
      tv.is_val = true;
      st.scopes[0]["this"] = tv;
      entry_objs_["this"] = self;
    }
    for (const auto& p : m.params) {
      if (st.scopes[0].count(p.name)) diag(p.span, "T-m Decl", "duplicate parameter '" + p.name + "'");
      bool ok = check_type_expr(p.type) && (!p.post || check_type_expr(*p.post));
      Var v;
      switch (p.type.kind) {
        case TypeExpr::Kind::Int:
        case TypeExpr::Kind::Bool:
          v.kind = p.type.kind == TypeExpr::Kind::Int ? Var::Kind::Int : Var::Kind::Bool;
          v.sym = p.name + "#0";
          pinned_.insert(v.sym);
          pinned_display_[v.sym] = p.name + "@pre";
          entry_syms_[p.name] = v.sym;
          if (v.kind == Var::Kind::Bool)
            st.assume(Formula::conj({Formula::ge(LinearTerm::var(v.sym), LinearTerm(0)),
                                     Formula::le(LinearTerm::var(v.sym), LinearTerm(1))}));
          break;
        case TypeExpr::Kind::String: v.kind = Var::Kind::String; break;
        case TypeExpr::Kind::State:
          v.kind = Var::Kind::Object;
          v.obj.cls = v.obj.state = p.type.name;
          entry_objs_[p.name] = v.obj;
          break;
        case TypeExpr::Kind::Pts:
          v.kind = Var::Kind::Object;
          if (ok) v.obj = make_pts(p.type, family(p.type.name)->owner, p.name, true);
          entry_objs_[p.name] = v.obj;
          break;
        default:
          diag(p.span, "T-m Decl", "parameter '" + p.name + "' needs a type");
          v.kind = Var::Kind::Int;
          v.sym = fresh(p.name);
      }
      st.scopes[0][p.name] = v;
    }

    // Assume the pre-contracts.
    std::map<std::string, Binding> names;
    for (const auto& [n, o] : entry_objs_) names[n] = Binding{&o, nullptr, {}};
    for (const auto& [n, s] : entry_syms_) names[n].sym = s;
    if (const ast::EnvContract* rc = m.receiver_contract(); rc && rc->pre.kind == TypeExpr::Kind::Pts && family(rc->pre.name))
      st.assume(bind_contract(rc->pre.constraint(), names, "this", rc->pre.span, "T-m Decl"));
    for (const auto& p : m.params)
      if (p.type.kind == TypeExpr::Kind::Pts && family(p.type.name))
        st.assume(bind_contract(p.type.constraint(), names, p.name, p.type.span, "T-m Decl"));

    exec_block(m.body, st);
    if (!st.dead()) {
      if (m.return_type.kind != TypeExpr::Kind::Void)
        diag(m.span, "T-m Decl", method_ + " may end without returning a value");
      check_posts(st, m.span);
    }
  } catch (const pa::BudgetExceeded& e) {
    diag(m.span, "solver", e.what());
    rep_.reason = "NeedsInvariant";
  } catch (const pa::ArithmeticOverflow& e) {
    diag(m.span, "solver", e.what());
  }
  for (const auto& [idx, count] : open_loops_)
    rep_.invariant_log[idx].adequate = count == rep_.diagnostics.size() + 1;
  open_loops_.clear();
}

void Checker::build() {
  bool ok = true;
  ast::for_each_state(prog_, [&](const ast::StateDecl& s) {
    if (classes_.count(s.name)) {
      diag(s.span, "T-state", "state '" + s.name + "' is declared twice");
      ok = false;
      return;
    }
    if (s.name == types::kBottom) return;
    h_.add(s.name, s.parent);
    ClassInfo& ci = classes_[s.name];
    ci.decl = &s;
    for (const auto& mem : s.members) {
      switch (mem.kind) {
        case ast::Member::Kind::Method: ci.methods[mem.method->name] = mem.method.get(); break;
        case ast::Member::Kind::Field: ci.fields[mem.field->name] = mem.field.get(); break;
        case ast::Member::Kind::PtsDef:
          if (families_.count(mem.pts->name)) {
            diag(mem.pts->span, "T-Pts-F", "family '" + mem.pts->name + "' is declared twice");
            break;
          }
          families_[mem.pts->name] = Family{mem.pts.get(), s.name};
          break;
        case ast::Member::Kind::State: break;
      }
    }
  });
  try {
    h_.validate();
  } catch (const std::invalid_argument& e) {
    diag(prog_.span, "T-state", e.what());
    ok = false;
  }
  if (!ok) throw std::runtime_error("bad hierarchy");

  for (const auto& [name, fam] : families_) {
    const ast::PtsDef& d = *fam.def;
    method_ = fam.owner;
    if (!known_state(d.sort)) diag(d.span, "T-Pts-F", "family " + name + " has unknown sort '" + d.sort + "'");
    std::set<std::string> vars;
    for (const auto& v : d.vars)
      if (!vars.insert(v).second) diag(d.span, "T-Pts-F", "index '" + v + "' is declared twice");
    if (d.constraint)
      for (const auto& v : d.constraint->free_vars())
        if (!vars.count(v)) diag(d.span, "T-Pts-F", "constraint of " + name + " mentions undeclared '" + v + "'");
  }
  for (const auto& [name, ci] : classes_)
    for (const auto& [fname, f] : ci.fields) {
      method_ = name;
      if (!check_type_expr(f->type)) continue;
      if (f->type.kind == TypeExpr::Kind::Pts) {
        diag(f->span, "T-f Decl", "p-typestate fields are not supported");
        continue;
      }
      if (f->init) {
        St st;
        Val v = eval(*f->init, st);
        fits(st, v, f->type, f->init->span, "T-f Decl", "field " + fname);
      }
    }
}

void Checker::run() {
  try {
    build();
  } catch (const std::runtime_error&) {
    return;
  }
  for (const auto& [name, ci] : classes_)
    for (const auto& mem : ci.decl->members)
      if (mem.kind == ast::Member::Kind::Method) check_method(*mem.method, name);
  check_method(prog_.main, "");
}

}  // namespace

// --------------------------------------------------------------------- report

const char* to_string(InvariantMode m) {
  switch (m) {
    case InvariantMode::Annotated: return "annotated";
    case InvariantMode::Accelerate: return "accelerate";
    default: return "both";
  }
}

std::optional<InvariantMode> parse_invariant_mode(const std::string& s) {
  if (s == "annotated") return InvariantMode::Annotated;
  if (s == "accelerate" || s == "accelerated") return InvariantMode::Accelerate;
  if (s == "both") return InvariantMode::Both;
  return std::nullopt;
}

Report check_program(const ast::Program& p, const Options& opts) {
  Report r;
  Checker(p, opts, r).run();
  std::stable_sort(r.diagnostics.begin(), r.diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return a.span.begin < b.span.begin;
  });
  if (!r.diagnostics.empty()) r.verdict = Verdict::Rejected;
  return r;
}

}  // namespace ptyck::check
