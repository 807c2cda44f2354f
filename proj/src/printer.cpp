#include "json.hpp"

#include "ptyck/syntax.hpp"

namespace ptyck {

using namespace ast;

namespace ast {

const char* to_string(Perm p) {
  switch (p) {
    case Perm::Unique: return "unique";
    case Perm::Immutable: return "immutable";
    default: return "";
  }
}

pa::Formula TypeExpr::constraint() const { return pa::Formula::conj(args); }

const Span& Member::span() const {
  switch (kind) {
    case Kind::Field: return field->span;
    case Kind::Method: return method->span;
    case Kind::State: return state->span;
    default: return pts->span;
  }
}

const std::string& Member::name() const {
  switch (kind) {
    case Kind::Field: return field->name;
    case Kind::Method: return method->name;
    case Kind::State: return state->name;
    default: return pts->name;
  }
}

// ------------------------------------------------------------------ equality

namespace {

bool eq_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool eq_opt(const std::optional<TypeExpr>& a, const std::optional<TypeExpr>& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool eq_members(const Member& a, const Member& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Member::Kind::Field:
      return a.field->is_val == b.field->is_val && equal(a.field->type, b.field->type) &&
             a.field->name == b.field->name && eq_ptr(a.field->init, b.field->init);
    case Member::Kind::Method: return equal(*a.method, *b.method);
    case Member::Kind::State: return equal(*a.state, *b.state);
    case Member::Kind::PtsDef:
      return a.pts->name == b.pts->name && a.pts->vars == b.pts->vars && a.pts->constraint == b.pts->constraint &&
             a.pts->sort == b.pts->sort;
  }
  return false;
}

}  // namespace

bool equal(const TypeExpr& a, const TypeExpr& b) {
  return a.kind == b.kind && a.perm == b.perm && a.name == b.name && a.args == b.args && a.state == b.state;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.text != b.text || a.int_value != b.int_value || a.binary_literal != b.binary_literal ||
      a.bool_value != b.bool_value || a.has_receiver != b.has_receiver || a.has_constraint != b.has_constraint ||
      a.constraint != b.constraint || a.has_inits != b.has_inits || a.operands.size() != b.operands.size() ||
      a.inits.size() != b.inits.size())
    return false;
  for (std::size_t i = 0; i < a.operands.size(); ++i)
    if (!eq_ptr(a.operands[i], b.operands[i])) return false;
  for (std::size_t i = 0; i < a.inits.size(); ++i)
    if (a.inits[i].name != b.inits[i].name || !eq_ptr(a.inits[i].value, b.inits[i].value)) return false;
  return true;
}

bool equal(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(*a[i], *b[i])) return false;
  return true;
}

bool equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.is_val != b.is_val || !eq_opt(a.type, b.type) || a.name != b.name ||
      !eq_ptr(a.init, b.init) || !eq_ptr(a.target, b.target) || !eq_ptr(a.value, b.value) ||
      !eq_opt(a.new_type, b.new_type) || !eq_ptr(a.scrutinee, b.scrutinee) || a.arms.size() != b.arms.size() ||
      !equal(a.default_body, b.default_body) || a.invariant != b.invariant || !equal(a.body, b.body))
    return false;
  for (std::size_t i = 0; i < a.arms.size(); ++i) {
    const auto& x = a.arms[i];
    const auto& y = b.arms[i];
    if (x.pattern_state != y.pattern_state || !eq_ptr(x.guard, y.guard) || !equal(x.body, y.body)) return false;
  }
  return true;
}

bool equal(const MethodDecl& a, const MethodDecl& b) {
  if (!equal(a.return_type, b.return_type) || a.name != b.name || a.params.size() != b.params.size() ||
      a.has_env != b.has_env || a.env.size() != b.env.size() || !equal(a.body, b.body))
    return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const auto& x = a.params[i];
    const auto& y = b.params[i];
    if (!equal(x.type, y.type) || !eq_opt(x.post, y.post) || x.name != y.name) return false;
  }
  for (std::size_t i = 0; i < a.env.size(); ++i) {
    const auto& x = a.env[i];
    const auto& y = b.env[i];
    if (!equal(x.pre, y.pre) || !equal(x.post, y.post) || x.target != y.target) return false;
  }
  return true;
}

bool equal(const StateDecl& a, const StateDecl& b) {
  if (a.name != b.name || a.parent != b.parent || a.members.size() != b.members.size()) return false;
  for (std::size_t i = 0; i < a.members.size(); ++i)
    if (!eq_members(a.members[i], b.members[i])) return false;
  return true;
}

bool equal(const Program& a, const Program& b) {
  if (a.states.size() != b.states.size() || !equal(a.main, b.main)) return false;
  for (std::size_t i = 0; i < a.states.size(); ++i)
    if (!equal(a.states[i], b.states[i])) return false;
  return true;
}

namespace {
void visit_state(const StateDecl& s, const std::function<void(const StateDecl&)>& fn) {
  fn(s);
  for (const auto& m : s.members)
    if (m.kind == Member::Kind::State) visit_state(*m.state, fn);
}
}  // namespace

void for_each_state(const Program& p, const std::function<void(const StateDecl&)>& fn) {
  for (const auto& s : p.states) visit_state(s, fn);
}

}  // namespace ast

// ------------------------------------------------------------------ printing

namespace {

int prec(const Expr& e) {
  if (e.kind == Expr::Kind::Unary) return 7;
  if (e.kind != Expr::Kind::Binary) return 9;
  const std::string& op = e.text;
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/" || op == "%") return 6;
  return 4;  // comparisons
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\', out += c;
    else if (c == '\n') out += "\\n";
    else if (c == '\t') out += "\\t";
    else out += c;
  }
  return out + "\"";
}

std::string binary_digits(std::int64_t v) {
  if (v == 0) return "0";
  std::string s;
  for (auto u = static_cast<std::uint64_t>(v); u; u >>= 1) s.insert(s.begin(), char('0' + (u & 1)));
  return s;
}

std::string formulas(const std::vector<pa::Formula>& fs) {
  std::string out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) out += ", ";
    out += fs[i].str();
  }
  return out;
}

std::string expr_str(const Expr& e);

std::string wrap(const Expr& e, bool paren) { return paren ? "(" + expr_str(e) + ")" : expr_str(e); }

std::string args_str(const std::vector<ExprPtr>& args) {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += expr_str(*args[i]);
  }
  return out + ")";
}

std::string expr_str(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Int:
      return e.binary_literal ? "0b" + binary_digits(e.int_value) : std::to_string(e.int_value);
    case Expr::Kind::Bool: return e.bool_value ? "true" : "false";
    case Expr::Kind::String: return quote(e.text);
    case Expr::Kind::Var: return e.text;
    case Expr::Kind::Field: return wrap(*e.operands[0], prec(*e.operands[0]) < 8) + "." + e.text;
    case Expr::Kind::Call:
      if (e.has_receiver)
        return wrap(*e.receiver(), prec(*e.receiver()) < 8) + "." + e.text + args_str(e.call_args());
      return e.text + args_str(e.operands);
    case Expr::Kind::New: {
      std::string out = "new " + e.text;
      if (e.has_constraint) out += "(" + formulas(e.constraint) + ")";
      if (e.has_inits) {
        out += " {";
        for (const auto& fi : e.inits) out += " " + fi.name + " = " + expr_str(*fi.value) + ";";
        out += " }";
      }
      return out;
    }
    case Expr::Kind::Unary: {
      int p = prec(e);
      return e.text + wrap(*e.operands[0], prec(*e.operands[0]) < p);
    }
    case Expr::Kind::Binary: {
      int p = prec(e);
      const Expr& l = *e.operands[0];
      const Expr& r = *e.operands[1];
      bool lp = p == 4 ? prec(l) <= p : prec(l) < p;
      return wrap(l, lp) + " " + e.text + " " + wrap(r, prec(r) <= p);
    }
  }
  return {};
}

std::string type_str(const TypeExpr& t) {
  std::string out;
  if (t.perm != Perm::None) out = std::string(to_string(t.perm)) + " ";
  switch (t.kind) {
    case TypeExpr::Kind::Void: return out + "void";
    case TypeExpr::Kind::Int: return out + "int";
    case TypeExpr::Kind::Bool: return out + "bool";
    case TypeExpr::Kind::String: return out + "string";
    case TypeExpr::Kind::State: return out + t.name;
    case TypeExpr::Kind::Wildcard: return out + "_";
    case TypeExpr::Kind::Pts: return out + t.name + "(" + formulas(t.args) + ") -> " + t.state;
  }
  return out;
}

class Printer {
 public:
  std::string out;

  void line(int depth, const std::string& s) { out += std::string(2 * depth, ' ') + s + "\n"; }

  void block(int depth, const Block& b, const std::string& head, const std::string& tail = "") {
    if (b.empty()) {
      line(depth, head + "{ }" + tail);
      return;
    }
    line(depth, head + "{");
    for (const auto& s : b) stmt(depth + 1, *s);
    line(depth, "}" + tail);
  }

  void stmt(int depth, const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Block: block(depth, s.body, ""); break;
      case Stmt::Kind::VarDecl: {
        std::string h = s.is_val ? "val " : "var ";
        if (s.type) h += type_str(*s.type) + " ";
        h += s.name;
        if (s.init) h += " = " + expr_str(*s.init);
        line(depth, h + ";");
        break;
      }
      case Stmt::Kind::Let: {
        std::string h = "let " + s.name + " = " + expr_str(*s.init) + " in";
        const Stmt& body = *s.body.front();
        if (body.kind == Stmt::Kind::Block) {
          block(depth, body.body, h + " ");
        } else {
          line(depth, h);
          stmt(depth + 1, body);
        }
        break;
      }
      case Stmt::Kind::Assign: line(depth, expr_str(*s.target) + " = " + expr_str(*s.value) + ";"); break;
      case Stmt::Kind::Update: line(depth, expr_str(*s.target) + " <- " + type_str(*s.new_type) + ";"); break;
      case Stmt::Kind::Match: {
        line(depth, "match (" + (s.scrutinee ? expr_str(*s.scrutinee) : std::string("*")) + ") {");
        for (const auto& arm : s.arms) {
          std::string pat = arm.guard ? expr_str(*arm.guard) : arm.pattern_state;
          block(depth + 1, arm.body, "case (" + pat + ") ");
        }
        block(depth + 1, s.default_body, "default ");
        line(depth, "}");
        break;
      }
      case Stmt::Kind::While: {
        std::string h = "while ";
        if (s.invariant) h += "[invariant { " + s.invariant->str() + " }] ";
        h += "(" + expr_str(*s.init) + ") ";
        block(depth, s.body, h);
        break;
      }
      case Stmt::Kind::Skip: line(depth, "skip;"); break;
      case Stmt::Kind::Return: line(depth, s.init ? "return " + expr_str(*s.init) + ";" : "return;"); break;
      case Stmt::Kind::Print: line(depth, "print(" + expr_str(*s.init) + ");"); break;
      case Stmt::Kind::Expr: line(depth, expr_str(*s.init) + ";"); break;
    }
  }

  void method(int depth, const MethodDecl& m) {
    std::string h = "method " + type_str(m.return_type) + " " + m.name + "(";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      const auto& p = m.params[i];
      if (i) h += ", ";
      h += type_str(p.type);
      if (p.post) h += " >> " + type_str(*p.post);
      h += " " + p.name;
    }
    h += ")";
    if (m.has_env) {
      h += "[";
      for (std::size_t i = 0; i < m.env.size(); ++i) {
        const auto& c = m.env[i];
        if (i) h += ", ";
        h += type_str(c.pre) + " >> " + type_str(c.post);
        if (!c.target.empty()) h += " " + c.target;
      }
      h += "]";
    }
    block(depth, m.body, h + " ");
  }

  void state(int depth, const StateDecl& s) {
    std::string h = "state " + s.name;
    if (s.parent) h += " case of " + *s.parent;
    if (s.members.empty()) {
      line(depth, h + " { }");
      return;
    }
    line(depth, h + " {");
    for (const auto& m : s.members) {
      switch (m.kind) {
        case Member::Kind::Field: {
          const auto& f = *m.field;
          std::string l = std::string(f.is_val ? "val " : "var ") + type_str(f.type) + " " + f.name;
          if (f.init) l += " = " + expr_str(*f.init);
          line(depth + 1, l + ";");
          break;
        }
        case Member::Kind::Method: method(depth + 1, *m.method); break;
        case Member::Kind::State: state(depth + 1, *m.state); break;
        case Member::Kind::PtsDef: {
          const auto& d = *m.pts;
          std::string l = "type " + d.name + " : Pi (";
          for (std::size_t i = 0; i < d.vars.size(); ++i) l += (i ? ", " : "") + d.vars[i];
          if (d.constraint) l += (d.vars.empty() ? "| " : " | ") + d.constraint->str();
          line(depth + 1, l + ") -> " + d.sort + ";");
          break;
        }
      }
    }
    line(depth, "}");
  }
};

// ------------------------------------------------------------------ json

using nlohmann::ordered_json;

ordered_json span_json(const Span& s) {
  return ordered_json{{"line", s.line}, {"col", s.col}, {"end_line", s.end_line}, {"end_col", s.end_col}};
}

ordered_json formulas_json(const std::vector<pa::Formula>& fs) {
  ordered_json a = ordered_json::array();
  for (const auto& f : fs) a.push_back(f.str());
  return a;
}

ordered_json type_json(const TypeExpr& t) {
  static const char* kinds[] = {"void", "int", "bool", "string", "state", "pts", "wildcard"};
  ordered_json j{{"kind", kinds[static_cast<int>(t.kind)]}};
  if (t.perm != Perm::None) j["perm"] = to_string(t.perm);
  if (t.kind == TypeExpr::Kind::State || t.kind == TypeExpr::Kind::Pts) j["name"] = t.name;
  if (t.is_pts()) {
    j["constraints"] = formulas_json(t.args);
    j["state"] = t.state;
  }
  j["span"] = span_json(t.span);
  return j;
}

ordered_json expr_json(const Expr& e) {
  static const char* kinds[] = {"int", "bool", "string", "var", "field", "call", "new", "unary", "binary"};
  ordered_json j{{"kind", kinds[static_cast<int>(e.kind)]}};
  switch (e.kind) {
    case Expr::Kind::Int:
      j["value"] = e.int_value;
      if (e.binary_literal) j["binary"] = true;
      break;
    case Expr::Kind::Bool: j["value"] = e.bool_value; break;
    case Expr::Kind::String: j["value"] = e.text; break;
    case Expr::Kind::Var: j["name"] = e.text; break;
    case Expr::Kind::Field:
      j["target"] = expr_json(*e.operands[0]);
      j["field"] = e.text;
      break;
    case Expr::Kind::Call: {
      j["method"] = e.text;
      if (e.has_receiver) j["receiver"] = expr_json(*e.receiver());
      ordered_json a = ordered_json::array();
      for (const auto& x : e.call_args()) a.push_back(expr_json(*x));
      j["args"] = a;
      break;
    }
    case Expr::Kind::New: {
      j["state"] = e.text;
      if (e.has_constraint) j["constraints"] = formulas_json(e.constraint);
      if (e.has_inits) {
        ordered_json a = ordered_json::array();
        for (const auto& fi : e.inits) a.push_back({{"field", fi.name}, {"value", expr_json(*fi.value)}});
        j["inits"] = a;
      }
      break;
    }
    case Expr::Kind::Unary:
    case Expr::Kind::Binary: {
      j["op"] = e.text;
      ordered_json a = ordered_json::array();
      for (const auto& x : e.operands) a.push_back(expr_json(*x));
      j["operands"] = a;
      break;
    }
  }
  j["span"] = span_json(e.span);
  return j;
}

ordered_json block_json(const Block& b);

ordered_json stmt_json(const Stmt& s) {
  static const char* kinds[] = {"var", "let", "assign", "update", "match", "while",
                                "skip", "return", "print", "expr", "block"};
  ordered_json j{{"kind", kinds[static_cast<int>(s.kind)]}};
  switch (s.kind) {
    case Stmt::Kind::VarDecl:
      j["val"] = s.is_val;
      if (s.type) j["type"] = type_json(*s.type);
      j["name"] = s.name;
      if (s.init) j["init"] = expr_json(*s.init);
      break;
    case Stmt::Kind::Let:
      j["name"] = s.name;
      j["init"] = expr_json(*s.init);
      j["body"] = block_json(s.body);
      break;
    case Stmt::Kind::Assign:
      j["target"] = expr_json(*s.target);
      j["value"] = expr_json(*s.value);
      break;
    case Stmt::Kind::Update:
      j["target"] = expr_json(*s.target);
      j["type"] = type_json(*s.new_type);
      break;
    case Stmt::Kind::Match: {
      j["scrutinee"] = s.scrutinee ? expr_json(*s.scrutinee) : ordered_json("*");
      ordered_json arms = ordered_json::array();
      for (const auto& a : s.arms) {
        ordered_json aj;
        if (a.guard) aj["guard"] = expr_json(*a.guard);
        else aj["state"] = a.pattern_state;
        aj["body"] = block_json(a.body);
        aj["span"] = span_json(a.span);
        arms.push_back(aj);
      }
      j["cases"] = arms;
      j["default"] = block_json(s.default_body);
      break;
    }
    case Stmt::Kind::While:
      if (s.invariant) j["invariant"] = s.invariant->str();
      j["condition"] = expr_json(*s.init);
      j["body"] = block_json(s.body);
      break;
    case Stmt::Kind::Return:
    case Stmt::Kind::Print:
    case Stmt::Kind::Expr:
      if (s.init) j["expr"] = expr_json(*s.init);
      break;
    case Stmt::Kind::Block: j["body"] = block_json(s.body); break;
    case Stmt::Kind::Skip: break;
  }
  j["span"] = span_json(s.span);
  return j;
}

ordered_json block_json(const Block& b) {
  ordered_json a = ordered_json::array();
  for (const auto& s : b) a.push_back(stmt_json(*s));
  return a;
}

ordered_json method_json(const MethodDecl& m) {
  ordered_json j{{"kind", "method"}, {"name", m.name}, {"return_type", type_json(m.return_type)}};
  ordered_json ps = ordered_json::array();
  for (const auto& p : m.params) {
    ordered_json pj{{"name", p.name}, {"type", type_json(p.type)}};
    if (p.post) pj["post"] = type_json(*p.post);
    ps.push_back(pj);
  }
  j["params"] = ps;
  if (m.has_env) {
    ordered_json es = ordered_json::array();
    for (const auto& c : m.env) {
      ordered_json cj{{"pre", type_json(c.pre)}, {"post", type_json(c.post)}};
      if (!c.target.empty()) cj["target"] = c.target;
      es.push_back(cj);
    }
    j["env"] = es;
  }
  j["body"] = block_json(m.body);
  j["span"] = span_json(m.span);
  return j;
}

ordered_json state_json(const StateDecl& s) {
  ordered_json j{{"kind", "state"}, {"name", s.name}};
  if (s.parent) j["parent"] = *s.parent;
  ordered_json ms = ordered_json::array();
  for (const auto& m : s.members) {
    switch (m.kind) {
      case Member::Kind::Field: {
        const auto& f = *m.field;
        ordered_json fj{{"kind", "field"}, {"val", f.is_val}, {"name", f.name}, {"type", type_json(f.type)}};
        if (f.init) fj["init"] = expr_json(*f.init);
        fj["span"] = span_json(f.span);
        ms.push_back(fj);
        break;
      }
      case Member::Kind::Method: ms.push_back(method_json(*m.method)); break;
      case Member::Kind::State: ms.push_back(state_json(*m.state)); break;
      case Member::Kind::PtsDef: {
        const auto& d = *m.pts;
        ordered_json dj{{"kind", "pts_def"}, {"name", d.name}, {"vars", d.vars}};
        if (d.constraint) dj["constraint"] = d.constraint->str();
        dj["sort"] = d.sort;
        dj["span"] = span_json(d.span);
        ms.push_back(dj);
        break;
      }
    }
  }
  j["members"] = ms;
  j["span"] = span_json(s.span);
  return j;
}

}  // namespace

std::string pretty_print(const Program& p) {
  Printer pr;
  for (const auto& s : p.states) {
    pr.state(0, s);
    pr.out += "\n";
  }
  pr.method(0, p.main);
  return pr.out;
}

std::string pretty_print(const TypeExpr& t) { return type_str(t); }
std::string pretty_print(const Expr& e) { return expr_str(e); }

std::string ast_to_json(const Program& p, int indent) {
  ordered_json states = ordered_json::array();
  for (const auto& s : p.states) states.push_back(state_json(s));
  ordered_json j{{"states", states}, {"main", method_json(p.main)}};
  return j.dump(indent);
}

}  // namespace ptyck
