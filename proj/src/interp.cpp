#include "ptyck/interp.hpp"

#include <algorithm>
#include <random>

#include "ptyck/solver.hpp"
#include "ptyck/typesys.hpp"

namespace ptyck::interp {

using ast::Expr;
using ast::Stmt;
using ast::TypeExpr;
using pa::Formula;

std::string Value::str() const {
  switch (kind) {
    case Kind::Unit: return "()";
    case Kind::Int: return std::to_string(i);
    case Kind::Bool: return b ? "true" : "false";
    case Kind::String: return s;
    case Kind::Ref: return "<object " + std::to_string(ref) + ">";
    case Kind::Null: return "null";
  }
  return {};
}

std::string Violation::str() const {
  return span.str() + ": " + kind + " of " + method + " violated: " + contract + " with " + pa::to_string(counters);
}

namespace {

struct Frame {
  std::vector<std::map<std::string, Value>> scopes{1};
  std::optional<int> self;
  const ast::MethodDecl* method = nullptr;
};

enum class Flow { Normal, Return };

}  // namespace

struct Interpreter::Impl {
  const ast::Program& prog;
  Options opts;
  std::mt19937_64 rng;
  types::StateHierarchy h;
  std::map<std::string, const ast::StateDecl*> classes;
  std::map<std::string, std::string> family_owner;
  std::map<std::string, const ast::PtsDef*> families;
  std::vector<Object> heap{Object{}};  // index 0 unused
  std::vector<Frame> frames{Frame{}};
  std::vector<TraceEvent> trace;
  std::vector<int> choices;
  std::size_t schedule_pos = 0;
  std::uint64_t steps = 0;
  std::string output;
  Value ret;

  Impl(const ast::Program& p, Options o) : prog(p), opts(std::move(o)), rng(opts.seed) {
    ast::for_each_state(prog, [&](const ast::StateDecl& s) {
      h.add(s.name, s.parent);
      classes[s.name] = &s;
      for (const auto& m : s.members)
        if (m.kind == ast::Member::Kind::PtsDef) {
          families[m.pts->name] = m.pts.get();
          family_owner[m.pts->name] = s.name;
        }
    });
    h.validate();
  }

  Frame& frame() { return frames.back(); }

  void tick(const Span& sp) {
    if (++steps > opts.step_limit) throw RuntimeError(sp, "step limit exceeded");
  }

  Value* find(const std::string& n) {
    auto& sc = frame().scopes;
    for (auto it = sc.rbegin(); it != sc.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  Object& deref(const Value& v, const Span& sp) {
    if (v.kind == Value::Kind::Null) throw RuntimeError(sp, "null dereference");
    if (v.kind != Value::Kind::Ref) throw RuntimeError(sp, "not an object: " + v.str());
    return heap.at(static_cast<std::size_t>(v.ref));
  }

  template <class F>
  const ast::StateDecl* find_member(const std::string& cls, F pred) {
    if (!h.contains(cls)) return nullptr;
    for (const auto& c : h.ancestors(cls)) {
      auto it = classes.find(c);
      if (it == classes.end()) continue;
      for (const auto& m : it->second->members)
        if (pred(m)) return it->second;
    }
    return nullptr;
  }

  const ast::MethodDecl* lookup_method(const std::string& cls, const std::string& name) {
    for (const auto& c : h.contains(cls) ? h.ancestors(cls) : std::vector<std::string>{}) {
      auto it = classes.find(c);
      if (it == classes.end()) continue;
      for (const auto& m : it->second->members)
        if (m.kind == ast::Member::Kind::Method && m.method->name == name) return m.method.get();
    }
    return nullptr;
  }

  std::vector<const ast::FieldDecl*> fields_of(const std::string& cls) {
    std::vector<const ast::FieldDecl*> out;
    auto anc = h.ancestors(cls);
    for (auto it = anc.rbegin(); it != anc.rend(); ++it) {
      auto c = classes.find(*it);
      if (c == classes.end()) continue;
      for (const auto& m : c->second->members)
        if (m.kind == ast::Member::Kind::Field) out.push_back(m.field.get());
    }
    return out;
  }

  static Value default_value(const TypeExpr& t) {
    switch (t.kind) {
      case TypeExpr::Kind::Int: return Value::integer(0);
      case TypeExpr::Kind::Bool: return Value::boolean(false);
      case TypeExpr::Kind::String: return Value::string("");
      case TypeExpr::Kind::Void: return Value::unit();
      default: return Value::null();
    }
  }

  // ------------------------------------------------------------ contracts

  /// Model for a contract formula: unqualified names are the subject's
  /// counters; `x.c` names x's counters; primed names read `post`.
  pa::Model contract_model(const Formula& f, const std::string& subject,
                           const std::map<std::string, const pa::Model*>& pre,
                           const std::map<std::string, const pa::Model*>& post,
                           const std::map<std::string, pa::Int>& ints, const Span& sp) {
    pa::Model m;
    for (const auto& n : f.free_vars()) {
      std::string b = n;
      bool primed = false;
      while (!b.empty() && b.back() == '\'') {
        b.pop_back();
        primed = true;
      }
      std::string who = subject, c = b;
      if (auto dot = b.find('.'); dot != std::string::npos) {
        who = b.substr(0, dot);
        c = b.substr(dot + 1);
      }
      const auto& src = primed ? post : pre;
      auto it = src.find(who);
      if (it != src.end() && it->second && it->second->count(c)) {
        m[n] = it->second->at(c);
        continue;
      }
      if (auto iv = ints.find(b); iv != ints.end() && !primed) {
        m[n] = iv->second;
        continue;
      }
      throw RuntimeError(sp, "contract name '" + n + "' has no value");
    }
    return m;
  }

  [[noreturn]] void violate(const std::string& method, const std::string& kind, const std::string& contract,
                            const pa::Model& counters, const Span& sp) {
    throw ProtocolViolation(Violation{method, contract, kind, counters, sp});
  }

  /// Counters satisfying `f` over a family's variables (least absolute values).
  pa::Model instantiate(const Formula& f, const ast::PtsDef& fam, const std::string& method, const Span& sp) {
    auto r = pa::is_satisfiable(f);
    if (!r.sat) violate(method, "instantiation", f.str(), {}, sp);
    pa::Model m;
    for (const auto& v : fam.vars) m[v] = r.model->count(v) ? r.model->at(v) : 0;
    return m;
  }

  // ----------------------------------------------------------- expressions

  pa::Int arith(const std::string& op, pa::Int a, pa::Int b, const Span& sp) {
    try {
      if (op == "+") return pa::checked_add(a, b);
      if (op == "-") return pa::checked_add(a, -b);
      if (op == "*") return pa::checked_mul(a, b);
      if (b == 0) throw RuntimeError(sp, "division by zero");
      if (op == "/") return pa::floor_div(a, b);
      return pa::mod_floor(a, b);
    } catch (const pa::ArithmeticOverflow&) {
      throw RuntimeError(sp, "integer overflow");
    }
  }

  Value eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Int: return Value::integer(e.int_value);
      case Expr::Kind::Bool: return Value::boolean(e.bool_value);
      case Expr::Kind::String: return Value::string(e.text);
      case Expr::Kind::Var: {
        if (e.text == "this") {
          if (!frame().self) throw RuntimeError(e.span, "'this' outside a method");
          return Value::object(*frame().self);
        }
        Value* v = find(e.text);
        if (!v) throw RuntimeError(e.span, "unknown variable '" + e.text + "'");
        return *v;
      }
      case Expr::Kind::Field: {
        Object& o = deref(eval(*e.operands[0]), e.span);
        auto it = o.fields.find(e.text);
        if (it == o.fields.end()) throw RuntimeError(e.span, "no field '" + e.text + "'");
        return it->second;
      }
      case Expr::Kind::Call: return call(e);
      case Expr::Kind::New: {
        Object o;
        o.cls = o.state = e.text;
        if (!classes.count(e.text)) throw RuntimeError(e.span, "unknown state '" + e.text + "'");
        heap.push_back(o);
        int ref = static_cast<int>(heap.size() - 1);
        for (const auto* f : fields_of(e.text)) {
          Value v = f->init ? eval(*f->init) : default_value(f->type);
          heap[static_cast<std::size_t>(ref)].fields[f->name] = v;
        }
        for (const auto& init : e.inits) {
          Value v = eval(*init.value);
          heap[static_cast<std::size_t>(ref)].fields[init.name] = v;
        }
        return Value::object(ref);
      }
      case Expr::Kind::Unary: {
        Value a = eval(*e.operands[0]);
        if (e.text == "-") {
          if (a.kind != Value::Kind::Int) throw RuntimeError(e.span, "'-' needs an int");
          return Value::integer(arith("-", 0, a.i, e.span));
        }
        if (a.kind != Value::Kind::Bool) throw RuntimeError(e.span, "'" + e.text + "' needs a bool");
        return Value::boolean(!a.b);
      }
      case Expr::Kind::Binary: return binary(e);
    }
    return Value::unit();
  }

  Value binary(const Expr& e) {
    const std::string& op = e.text;
    Value a = eval(*e.operands[0]);
    if (op == "&&" || op == "and" || op == "||" || op == "or") {
      if (a.kind != Value::Kind::Bool) throw RuntimeError(e.span, "'" + op + "' needs bools");
      bool conj = op == "&&" || op == "and";
      if (a.b != conj) return a;
      Value b = eval(*e.operands[1]);
      if (b.kind != Value::Kind::Bool) throw RuntimeError(e.span, "'" + op + "' needs bools");
      return b;
    }
    Value b = eval(*e.operands[1]);
    if (op == "==") return Value::boolean(a == b);
    if (op == "!=") return Value::boolean(!(a == b));
    if (a.kind != Value::Kind::Int || b.kind != Value::Kind::Int) throw RuntimeError(e.span, "'" + op + "' needs ints");
    if (op == "<") return Value::boolean(a.i < b.i);
    if (op == "<=") return Value::boolean(a.i <= b.i);
    if (op == ">") return Value::boolean(a.i > b.i);
    if (op == ">=") return Value::boolean(a.i >= b.i);
    return Value::integer(arith(op, a.i, b.i, e.span));
  }

  Value call(const Expr& e) {
    Value recv_v = e.has_receiver ? eval(*e.receiver())
                                  : (frame().self ? Value::object(*frame().self) : Value::null());
    std::vector<Value> args;
    for (const auto& a : e.call_args()) args.push_back(eval(*a));
    deref(recv_v, e.span);
    int ref = recv_v.ref;
    const ast::MethodDecl* m = lookup_method(heap[static_cast<std::size_t>(ref)].cls, e.text);
    if (!m) throw RuntimeError(e.span, "no method '" + e.text + "'");
    if (m->params.size() != args.size()) throw RuntimeError(e.span, "wrong number of arguments to " + e.text);
    const ast::EnvContract* rc = m->receiver_contract();

    auto obj = [&](int r) -> Object& { return heap[static_cast<std::size_t>(r)]; };
    // Pre snapshots.
    std::map<std::string, pa::Model> pre_snap;
    std::map<std::string, std::string> pre_state;
    std::map<std::string, pa::Int> ints;
    pre_snap["this"] = obj(ref).counters;
    pre_state["this"] = obj(ref).state;
    for (std::size_t i = 0; i < args.size(); ++i) {
      const auto& p = m->params[i];
      if (args[i].kind == Value::Kind::Ref) {
        pre_snap[p.name] = obj(args[i].ref).counters;
        pre_state[p.name] = obj(args[i].ref).state;
      } else if (args[i].kind == Value::Kind::Int) {
        ints[p.name] = args[i].i;
      } else if (args[i].kind == Value::Kind::Bool) {
        ints[p.name] = args[i].b ? 1 : 0;
      }
    }
    auto snaps = [&](const std::map<std::string, pa::Model>& s) {
      std::map<std::string, const pa::Model*> out;
      for (const auto& [k, v] : s) out[k] = &v;
      return out;
    };

    std::optional<std::size_t> event;
    if (obj(ref).pts) {
      trace.push_back(TraceEvent{e.text, ref, obj(ref).cls, obj(ref).counters, obj(ref).counters});
      event = trace.size() - 1;
    }

    if (opts.dynamic_checks) {
      auto check_pre = [&](const std::string& who, const TypeExpr& t, const Value& v) {
        if (t.kind == TypeExpr::Kind::State && v.kind == Value::Kind::Ref && !h.leq(obj(v.ref).state, t.name))
          violate(e.text, "precondition", "state " + t.name + " (found " + obj(v.ref).state + ")", obj(v.ref).counters,
                  e.span);
        if (t.kind != TypeExpr::Kind::Pts) return;
        if (v.kind != Value::Kind::Ref) throw RuntimeError(e.span, who + " is not an object");
        Object& o = obj(v.ref);
        if (!o.pts || o.family != t.name)
          violate(e.text, "precondition", "p-typestate " + t.name, o.counters, e.span);
        if (!h.leq(o.state, t.state))
          violate(e.text, "precondition", "state " + t.state + " (found " + o.state + ")", o.counters, e.span);
        Formula f = t.constraint();
        if (!pa::evaluate(f, contract_model(f, who, snaps(pre_snap), {}, ints, e.span)))
          violate(e.text, "precondition", f.str(), o.counters, e.span);
      };
      if (rc) check_pre("this", rc->pre, recv_v);
      for (std::size_t i = 0; i < args.size(); ++i) check_pre(m->params[i].name, m->params[i].type, args[i]);
    }

    // Body.
    Frame f;
    f.self = ref;
    f.method = m;
    for (std::size_t i = 0; i < args.size(); ++i) f.scopes[0][m->params[i].name] = args[i];
    if (frames.size() > 10000) throw RuntimeError(e.span, "call depth exceeded");
    frames.push_back(std::move(f));
    ret = Value::unit();
    exec_block(m->body);
    Value result = ret;
    frames.pop_back();
    if (event) trace[*event].post = obj(ref).counters;

    if (opts.dynamic_checks) {
      std::map<std::string, pa::Model> post_snap;
      post_snap["this"] = obj(ref).counters;
      for (std::size_t i = 0; i < args.size(); ++i)
        if (args[i].kind == Value::Kind::Ref) post_snap[m->params[i].name] = obj(args[i].ref).counters;
      auto check_post = [&](const std::string& who, const TypeExpr& t, const Value& v) {
        if (v.kind != Value::Kind::Ref) return;
        Object& o = obj(v.ref);
        if (t.kind == TypeExpr::Kind::Wildcard) {
          if (o.state != pre_state[who] || o.counters != pre_snap[who])
            violate(e.text, "postcondition", "_ (unchanged typestate)", o.counters, e.span);
          return;
        }
        if (t.kind == TypeExpr::Kind::State && !h.leq(o.state, t.name))
          violate(e.text, "postcondition", "state " + t.name + " (found " + o.state + ")", o.counters, e.span);
        if (t.kind != TypeExpr::Kind::Pts) return;
        if (!h.leq(o.state, t.state))
          violate(e.text, "postcondition", "state " + t.state + " (found " + o.state + ")", o.counters, e.span);
        Formula phi = t.constraint();
        if (!pa::evaluate(phi, contract_model(phi, who, snaps(pre_snap), snaps(post_snap), ints, e.span)))
          violate(e.text, "postcondition", phi.str(), o.counters, e.span);
      };
      if (rc) check_post("this", rc->post, recv_v);
      for (std::size_t i = 0; i < args.size(); ++i)
        if (m->params[i].post) check_post(m->params[i].name, *m->params[i].post, args[i]);
    }
    return result;
  }

  // ------------------------------------------------------------ statements

  Flow exec_block(const ast::Block& b) {
    frame().scopes.emplace_back();
    Flow fl = Flow::Normal;
    for (const auto& s : b) {
      fl = exec(*s);
      if (fl == Flow::Return) break;
    }
    frame().scopes.pop_back();
    return fl;
  }

  void tag(int ref, const TypeExpr& t, const Expr* made_by, const Span& sp) {
    Object& o = heap[static_cast<std::size_t>(ref)];
    auto fam = families.find(t.name);
    if (fam == families.end()) throw RuntimeError(sp, "unknown family '" + t.name + "'");
    std::string where = frame().method ? frame().method->name : "main";
    if (o.pts) {
      // Aliasing an existing p-typestate.
      if (opts.dynamic_checks) {
        Formula f = t.constraint();
        std::map<std::string, const pa::Model*> pre{{"", &o.counters}};
        if (o.family != t.name || !h.leq(o.state, t.state) || !pa::evaluate(f, contract_model(f, "", pre, {}, {}, sp)))
          violate(where, "instantiation", t.name + "(" + f.str() + ") -> " + t.state, o.counters, sp);
      }
      return;
    }
    std::vector<Formula> fs{t.constraint()};
    if (made_by)
      for (const auto& c : made_by->constraint) fs.push_back(c);
    o.pts = true;
    o.family = t.name;
    o.state = t.state;
    o.counters = instantiate(Formula::conj(fs), *fam->second, where, sp);
  }

  Flow exec(const Stmt& s) {
    tick(s.span);
    switch (s.kind) {
      case Stmt::Kind::VarDecl: {
        Value v = s.init ? eval(*s.init) : (s.type ? default_value(*s.type) : Value::null());
        if (s.type && s.type->kind == TypeExpr::Kind::Pts && v.kind == Value::Kind::Ref)
          tag(v.ref, *s.type, s.init && s.init->kind == Expr::Kind::New ? s.init.get() : nullptr, s.span);
        frame().scopes.back()[s.name] = v;
        return Flow::Normal;
      }
      case Stmt::Kind::Let: {
        Value v = eval(*s.init);
        frame().scopes.emplace_back();
        frame().scopes.back()[s.name] = v;
        Flow fl = Flow::Normal;
        for (const auto& b : s.body) {
          fl = exec(*b);
          if (fl == Flow::Return) break;
        }
        frame().scopes.pop_back();
        return fl;
      }
      case Stmt::Kind::Assign: {
        Value v = eval(*s.value);
        const Expr& t = *s.target;
        if (t.kind == Expr::Kind::Field) {
          Object& o = deref(eval(*t.operands[0]), t.span);
          o.fields[t.text] = v;
        } else {
          Value* x = find(t.text);
          if (!x) throw RuntimeError(t.span, "unknown variable '" + t.text + "'");
          *x = v;
        }
        return Flow::Normal;
      }
      case Stmt::Kind::Update: {
        Object& o = deref(eval(*s.target), s.span);
        const TypeExpr& t = *s.new_type;
        if (t.kind == TypeExpr::Kind::State) {
          o.state = t.name;
          return Flow::Normal;
        }
        if (t.kind != TypeExpr::Kind::Pts) throw RuntimeError(s.span, "bad typestate update");
        if (!o.pts || o.family != t.name) throw RuntimeError(s.span, "object is not a " + t.name + " p-typestate");
        // Solve the relation for the new counters. Unprimed names read the
        // target's counters, other objects' counters or int/bool locals.
        std::string tname = s.target->kind == Expr::Kind::Var ? s.target->text : "this";
        std::map<std::string, pa::LinearTerm> now;
        std::map<std::string, std::string> fresh;
        for (const auto& n : t.constraint().free_vars()) {
          std::string b = n;
          bool primed = false;
          while (!b.empty() && b.back() == '\'') {
            b.pop_back();
            primed = true;
          }
          std::string who = tname, c = b;
          if (auto dot = b.find('.'); dot != std::string::npos) {
            who = b.substr(0, dot);
            c = b.substr(dot + 1);
          }
          bool mine = (who == tname || who == "this") && o.counters.count(c);
          if (primed) {
            if (!mine) throw RuntimeError(s.span, "primed name '" + n + "' is not a counter of the target");
            fresh[n] = c;
            continue;
          }
          if (mine) {
            now[n] = pa::LinearTerm(o.counters.at(c));
            continue;
          }
          Value v = Value::null();
          if (b.find('.') != std::string::npos) {
            Value* x = who == "this" ? nullptr : find(who);
            Value xv = who == "this" && frame().self ? Value::object(*frame().self) : x ? *x : Value::null();
            if (xv.kind == Value::Kind::Ref) {
              const Object& other = heap[static_cast<std::size_t>(xv.ref)];
              if (other.counters.count(c)) {
                now[n] = pa::LinearTerm(other.counters.at(c));
                continue;
              }
            }
          } else if (Value* x = find(b)) {
            v = *x;
          }
          if (v.kind == Value::Kind::Int) now[n] = pa::LinearTerm(v.i);
          else if (v.kind == Value::Kind::Bool) now[n] = pa::LinearTerm(v.b ? 1 : 0);
          else throw RuntimeError(s.span, "update mentions '" + n + "', which has no value");
        }
        Formula rel = t.constraint().substitute(now).rename(fresh);
        auto r = pa::is_satisfiable(rel);
        std::string where = frame().method ? frame().method->name : "main";
        if (!r.sat) violate(where, "update", t.constraint().str(), o.counters, s.span);
        for (auto& [c, v] : o.counters)
          if (r.model->count(c)) v = r.model->at(c);
        o.state = t.state;
        return Flow::Normal;
      }
      case Stmt::Kind::Match: return exec_match(s);
      case Stmt::Kind::While:
        for (;;) {
          Value c = eval(*s.init);
          if (c.kind != Value::Kind::Bool) throw RuntimeError(s.span, "loop condition is not a bool");
          if (!c.b) return Flow::Normal;
          tick(s.span);
          if (exec_block(s.body) == Flow::Return) return Flow::Return;
        }
      case Stmt::Kind::Skip: return Flow::Normal;
      case Stmt::Kind::Return:
        ret = s.init ? eval(*s.init) : Value::unit();
        return Flow::Return;
      case Stmt::Kind::Print: {
        std::string line = eval(*s.init).str() + "\n";
        output += line;
        if (opts.out) *opts.out << line;
        return Flow::Normal;
      }
      case Stmt::Kind::Expr: eval(*s.init); return Flow::Normal;
      case Stmt::Kind::Block: return exec_block(s.body);
    }
    return Flow::Normal;
  }

  Flow exec_match(const Stmt& s) {
    if (!s.scrutinee) {
      std::vector<int> enabled;
      for (std::size_t i = 0; i < s.arms.size(); ++i) {
        Value g = eval(*s.arms[i].guard);
        if (g.kind != Value::Kind::Bool) throw RuntimeError(s.arms[i].span, "guard is not a bool");
        if (g.b) enabled.push_back(static_cast<int>(i));
      }
      int pick = -1;
      if (schedule_pos < opts.schedule.size()) {
        int want = opts.schedule[schedule_pos++];
        if (std::find(enabled.begin(), enabled.end(), want) != enabled.end()) pick = want;
      } else if (!enabled.empty()) {
        std::uniform_int_distribution<std::size_t> d(0, enabled.size() - 1);
        pick = enabled[d(rng)];
      }
      choices.push_back(pick);
      return exec_block(pick < 0 ? s.default_body : s.arms[static_cast<std::size_t>(pick)].body);
    }
    Object& o = deref(eval(*s.scrutinee), s.span);
    for (const auto& arm : s.arms)
      if (h.leq(o.state, arm.pattern_state)) return exec_block(arm.body);
    return exec_block(s.default_body);
  }
};

Interpreter::Interpreter(const ast::Program& p, Options opts) : impl_(std::make_unique<Impl>(p, std::move(opts))) {}
Interpreter::~Interpreter() = default;

Value Interpreter::eval(const ast::Expr& e) { return impl_->eval(e); }
void Interpreter::execute(const ast::Stmt& s) { impl_->exec(s); }

const Value* Interpreter::lookup(const std::string& name) const {
  const auto& sc = impl_->frames.back().scopes;
  for (auto it = sc.rbegin(); it != sc.rend(); ++it) {
    auto f = it->find(name);
    if (f != it->end()) return &f->second;
  }
  return nullptr;
}

const Object& Interpreter::object(int ref) const { return impl_->heap.at(static_cast<std::size_t>(ref)); }
const std::vector<TraceEvent>& Interpreter::trace() const { return impl_->trace; }

RunResult Interpreter::run_main() {
  RunResult r;
  try {
    impl_->ret = Value::unit();
    impl_->frames.push_back(Frame{});
    impl_->frames.back().method = &impl_->prog.main;
    impl_->exec_block(impl_->prog.main.body);
    r.exit = impl_->ret;
    impl_->frames.pop_back();
  } catch (const ProtocolViolation& v) {
    r.status = RunResult::Status::Violation;
    r.violation = v.violation;
    r.message = v.what();
  } catch (const RuntimeError& e) {
    r.status = RunResult::Status::Error;
    r.message = e.what();
  } catch (const pa::BudgetExceeded& e) {
    r.status = RunResult::Status::Error;
    r.message = e.what();
  }
  r.trace = impl_->trace;
  r.output = impl_->output;
  r.choices = impl_->choices;
  return r;
}

RunResult run_main(const ast::Program& p, const Options& opts) {
  try {
    Interpreter in(p, opts);
    return in.run_main();
  } catch (const std::invalid_argument& e) {
    RunResult r;
    r.status = RunResult::Status::Error;
    r.message = e.what();
    return r;
  }
}

}  // namespace ptyck::interp
