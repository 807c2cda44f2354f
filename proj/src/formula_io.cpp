#include "ptyck/formula_io.hpp"

#include <cctype>
#include <functional>

#include "ptyck/solver.hpp"

namespace ptyck::pa {

namespace {

Formula parse_iff(TokenStream& ts);

bool at_relop(const TokenStream& ts) {
  const Token& t = ts.peek();
  if (t.kind != TokenKind::Punct) return false;
  return t.text == "==" || t.text == "=" || t.text == "!=" || t.text == "<=" || t.text == "<" ||
         t.text == ">=" || t.text == ">";
}

AtomKind relop(const std::string& s) {
  if (s == "==" || s == "=") return AtomKind::EQ;
  if (s == "!=") return AtomKind::NEQ;
  if (s == "<=") return AtomKind::LE;
  if (s == "<") return AtomKind::LT;
  if (s == ">=") return AtomKind::GE;
  return AtomKind::GT;
}

std::string parse_name(TokenStream& ts) {
  std::string n = ts.expect_ident("variable");
  while (ts.peek().is_punct(".") && ts.peek(1).kind == TokenKind::Ident) {
    ts.next();
    n += "." + ts.next().text;
  }
  return n;
}

LinearTerm parse_sum(TokenStream& ts);

// `t / k` inside a comparison becomes a quotient variable q with
// k*q <= t < k*q + k, bound and eliminated around that comparison.
struct Quotient {
  std::string var;
  LinearTerm num;
  Int k;
};
thread_local std::vector<Quotient> quotients;
thread_local int quotient_serial = 0;

class QuotientScope {
 public:
  QuotientScope() : mark_(quotients.size()) {}
  ~QuotientScope() { quotients.resize(mark_); }
  bool pending() const { return quotients.size() > mark_; }
  Formula close(Formula f) {
    if (quotients.size() == mark_) return f;
    std::vector<Formula> parts;
    std::vector<std::string> vars;
    for (std::size_t i = mark_; i < quotients.size(); ++i) {
      const auto& q = quotients[i];
      LinearTerm kq = LinearTerm::var(q.var) * q.k;
      parts.push_back(Formula::le(kq, q.num));
      parts.push_back(Formula::lt(q.num, kq + LinearTerm(q.k)));
      vars.push_back(q.var);
    }
    parts.push_back(std::move(f));
    quotients.resize(mark_);
    return eliminate_quantifiers(Formula::exists(vars, Formula::conj(std::move(parts))));
  }

 private:
  std::size_t mark_;
};

LinearTerm parse_atom_term(TokenStream& ts) {
  const Token& t = ts.peek();
  if (t.kind == TokenKind::Int) return LinearTerm(ts.next().value);
  if (t.kind == TokenKind::Ident) return LinearTerm::var(parse_name(ts));
  if (ts.accept_punct("(")) {
    LinearTerm r = parse_sum(ts);
    ts.expect_punct(")");
    return r;
  }
  ts.fail("expected term");
}

// Unary minus binds tighter than * and /, so -7 / 2 is -4.
LinearTerm parse_signed(TokenStream& ts) {
  if (ts.accept_punct("-")) return -parse_signed(ts);
  return parse_atom_term(ts);
}

LinearTerm parse_product(TokenStream& ts) {
  Span start = ts.peek().span;
  LinearTerm acc = parse_signed(ts);
  while (ts.accept_punct("*")) {
    LinearTerm rhs = parse_signed(ts);
    if (acc.is_constant()) acc = rhs * acc.constant();
    else if (rhs.is_constant()) acc = acc * rhs.constant();
    else throw SyntaxError(join(start, ts.previous().span), "non-linear product");
  }
  while (ts.accept_punct("/")) {
    LinearTerm rhs = parse_atom_term(ts);
    if (!rhs.is_constant() || rhs.constant() <= 0)
      throw SyntaxError(join(start, ts.previous().span), "division needs a positive constant divisor");
    Int k = rhs.constant();
    if (acc.is_constant()) {
      acc = LinearTerm(floor_div(acc.constant(), k));
      continue;
    }
    std::string q = "quot%" + std::to_string(++quotient_serial);
    quotients.push_back({q, acc, k});
    acc = LinearTerm::var(q);
  }
  return acc;
}

LinearTerm parse_sum(TokenStream& ts) {
  LinearTerm acc = parse_product(ts);
  for (;;) {
    if (ts.accept_punct("+")) acc = acc + parse_product(ts);
    else if (ts.accept_punct("-")) acc = acc - parse_product(ts);
    else return acc;
  }
}

Formula parse_comparison(TokenStream& ts) {
  QuotientScope scope;
  LinearTerm lhs = parse_sum(ts);
  if (!at_relop(ts)) ts.fail("expected comparison operator");
  std::vector<Formula> parts;
  while (at_relop(ts)) {
    AtomKind k = relop(ts.next().text);
    LinearTerm rhs = parse_sum(ts);
    parts.push_back(Formula::cmp(k, lhs, rhs));
    lhs = rhs;
  }
  return scope.close(Formula::conj(std::move(parts)));
}

Formula parse_quantifier(TokenStream& ts, bool exists) {
  std::vector<std::string> vars;
  do {
    vars.push_back(ts.expect_ident("bound variable"));
  } while (ts.accept_punct(","));
  bool nat = false;
  if (ts.accept_punct(":")) {
    if (ts.accept_kw("nat")) nat = true;
    else ts.expect_kw("int");
  }
  ts.expect_punct(".");
  Formula body = parse_iff(ts);
  if (nat) {
    std::vector<Formula> guards;
    for (const auto& v : vars) guards.push_back(Formula::ge(LinearTerm::var(v), LinearTerm(0)));
    Formula g = Formula::conj(guards);
    body = exists ? Formula::conj({g, body}) : Formula::implies(g, body);
  }
  return exists ? Formula::exists(vars, body) : Formula::forall(vars, body);
}

Formula parse_unary(TokenStream& ts) {
  if (ts.accept_punct("!") || ts.accept_punct("~") || ts.accept_kw("not")) return Formula::negate(parse_unary(ts));
  if (ts.accept_kw("exists")) return parse_quantifier(ts, true);
  if (ts.accept_kw("forall")) return parse_quantifier(ts, false);
  if (ts.accept_kw("true")) return Formula::truth(true);
  if (ts.accept_kw("false")) return Formula::truth(false);
  if (ts.accept_kw("div")) {
    ts.expect_punct("(");
    Span at = ts.peek().span;
    Int d = ts.expect_int();
    if (d <= 0) throw SyntaxError(at, "divisor must be positive");
    ts.expect_punct(",");
    QuotientScope scope;
    LinearTerm t = parse_sum(ts);
    ts.expect_punct(")");
    return scope.close(Formula::divides(d, t));
  }
  if (ts.peek().is_punct("(")) {
    // Either a parenthesized formula or a parenthesized term starting a comparison.
    std::size_t m = ts.mark();
    try {
      ts.next();
      Formula f = parse_iff(ts);
      ts.expect_punct(")");
      if (!at_relop(ts) && !ts.peek().is_punct("+") && !ts.peek().is_punct("-") && !ts.peek().is_punct("*"))
        return f;
    } catch (const SyntaxError&) {
    }
    ts.reset(m);
  }
  return parse_comparison(ts);
}

Formula parse_and(TokenStream& ts) {
  std::vector<Formula> parts{parse_unary(ts)};
  while (ts.accept_punct("&&") || ts.accept_kw("and")) parts.push_back(parse_unary(ts));
  return Formula::conj(std::move(parts));
}

Formula parse_or(TokenStream& ts) {
  std::vector<Formula> parts{parse_and(ts)};
  while (ts.accept_punct("||") || ts.accept_kw("or")) parts.push_back(parse_and(ts));
  return Formula::disj(std::move(parts));
}

Formula parse_implies(TokenStream& ts) {
  Formula lhs = parse_or(ts);
  if (ts.accept_punct("=>")) return Formula::implies(lhs, parse_implies(ts));
  return lhs;
}

Formula parse_iff(TokenStream& ts) {
  Formula lhs = parse_implies(ts);
  while (ts.accept_punct("<=>")) lhs = Formula::iff(lhs, parse_implies(ts));
  return lhs;
}

void expect_end(TokenStream& ts) {
  if (!ts.at_end()) ts.fail("unexpected trailing input");
}

}  // namespace

Formula parse_formula(TokenStream& ts) { return parse_iff(ts); }
LinearTerm parse_term(TokenStream& ts) {
  QuotientScope scope;
  Span at = ts.peek().span;
  LinearTerm t = parse_sum(ts);
  if (scope.pending())
    throw SyntaxError(at, "division is only allowed inside a comparison");
  return t;
}

Formula parse_formula(std::string_view src) {
  TokenStream ts(tokenize(src));
  Formula f = parse_iff(ts);
  expect_end(ts);
  return f;
}

LinearTerm parse_term(std::string_view src) {
  TokenStream ts(tokenize(src));
  LinearTerm t = parse_sum(ts);
  expect_end(ts);
  return t;
}

FormulaDocument parse_formula_document(std::string_view src) {
  TokenStream ts(tokenize(src));
  FormulaDocument doc;
  while (ts.peek().is_kw("nat") || ts.peek().is_kw("int")) {
    Sort s = ts.next().text == "nat" ? Sort::Nat : Sort::Int;
    do {
      Span at = ts.peek().span;
      std::string v = parse_name(ts);
      if (!doc.sorts.emplace(v, s).second) throw SyntaxError(at, "variable '" + v + "' declared twice");
    } while (ts.accept_punct(","));
    ts.expect_punct(";");
  }
  doc.body = parse_iff(ts);
  expect_end(ts);
  return doc;
}

Formula FormulaDocument::sort_constraint() const {
  std::vector<Formula> gs;
  for (const auto& [v, s] : sorts)
    if (s == Sort::Nat) gs.push_back(Formula::ge(LinearTerm::var(v), LinearTerm(0)));
  return Formula::conj(gs);
}

Formula FormulaDocument::query() const { return Formula::implies(sort_constraint(), body); }

// ------------------------------------------------------------------ SMT-LIB

namespace {

std::string smt_symbol(const std::string& name) {
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') simple = false;
  return simple ? name : "|" + name + "|";
}

std::string smt_int(Int v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

std::string smt_term(const LinearTerm& t) {
  std::vector<std::string> parts;
  for (const auto& [v, c] : t.coeffs())
    parts.push_back(c == 1 ? smt_symbol(v) : "(* " + smt_int(c) + " " + smt_symbol(v) + ")");
  if (t.constant() != 0 || parts.empty()) parts.push_back(smt_int(t.constant()));
  if (parts.size() == 1) return parts.front();
  std::string out = "(+";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

std::string smt_formula(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Atom: {
      const Atom& a = f.atom_value();
      std::string t = smt_term(a.term);
      switch (a.kind) {
        case AtomKind::LE: return "(<= " + t + " 0)";
        case AtomKind::LT: return "(< " + t + " 0)";
        case AtomKind::GE: return "(>= " + t + " 0)";
        case AtomKind::GT: return "(> " + t + " 0)";
        case AtomKind::EQ: return "(= " + t + " 0)";
        case AtomKind::NEQ: return "(not (= " + t + " 0))";
        case AtomKind::DIVIDES: return "(= (mod " + t + " " + std::to_string(a.divisor) + ") 0)";
      }
      return "true";
    }
    case K::Not: return "(not " + smt_formula(f.child()) + ")";
    case K::And:
    case K::Or: {
      std::string out = f.kind() == K::And ? "(and" : "(or";
      for (const auto& k : f.children()) out += " " + smt_formula(k);
      return out + ")";
    }
    case K::Exists:
    case K::Forall:
      return std::string("(") + (f.kind() == K::Exists ? "exists" : "forall") + " ((" +
             smt_symbol(f.bound_var()) + " Int)) " + smt_formula(f.child()) + ")";
  }
  return "true";
}

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
};

class SmtReader {
 public:
  explicit SmtReader(std::string_view s) : src_(s) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < src_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      else if (src_[pos_] == ';') while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      else break;
    }
  }
  [[noreturn]] void fail(const std::string& m) const {
    Span s;
    s.begin = s.end = pos_;
    throw SyntaxError(s, "smt-lib: " + m);
  }
  SExpr read() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    SExpr e;
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      e.is_list = true;
      skip();
      while (pos_ < src_.size() && src_[pos_] != ')') {
        e.items.push_back(read());
        skip();
      }
      if (pos_ >= src_.size()) fail("missing ')'");
      ++pos_;
    } else if (c == ')') {
      fail("unexpected ')'");
    } else if (c == '|') {
      std::size_t end = src_.find('|', pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated quoted symbol");
      e.atom = std::string(src_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
    } else {
      std::size_t start = pos_;
      while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '(' &&
             src_[pos_] != ')')
        ++pos_;
      e.atom = std::string(src_.substr(start, pos_ - start));
    }
    return e;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

[[noreturn]] void smt_fail(const std::string& m) { throw SyntaxError(Span{}, "smt-lib: " + m); }

LinearTerm smt_to_term(const SExpr& e) {
  if (!e.is_list) {
    if (is_number(e.atom)) return LinearTerm(std::stoll(e.atom));
    return LinearTerm::var(e.atom);
  }
  if (e.items.empty() || e.items[0].is_list) smt_fail("bad term");
  const std::string& op = e.items[0].atom;
  if (op == "+") {
    LinearTerm acc;
    for (std::size_t i = 1; i < e.items.size(); ++i) acc = acc + smt_to_term(e.items[i]);
    return acc;
  }
  if (op == "-") {
    if (e.items.size() == 2) return -smt_to_term(e.items[1]);
    LinearTerm acc = smt_to_term(e.items.at(1));
    for (std::size_t i = 2; i < e.items.size(); ++i) acc = acc - smt_to_term(e.items[i]);
    return acc;
  }
  if (op == "*") {
    LinearTerm acc(1);
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      LinearTerm r = smt_to_term(e.items[i]);
      if (acc.is_constant()) acc = r * acc.constant();
      else if (r.is_constant()) acc = acc * r.constant();
      else smt_fail("non-linear product");
    }
    return acc;
  }
  smt_fail("unsupported term operator '" + op + "'");
}

Formula smt_to_formula(const SExpr& e) {
  if (!e.is_list) {
    if (e.atom == "true") return Formula::truth(true);
    if (e.atom == "false") return Formula::truth(false);
    smt_fail("unexpected symbol '" + e.atom + "'");
  }
  if (e.items.empty() || e.items[0].is_list) smt_fail("bad formula");
  const std::string& op = e.items[0].atom;
  auto kids = [&]() {
    std::vector<Formula> ks;
    for (std::size_t i = 1; i < e.items.size(); ++i) ks.push_back(smt_to_formula(e.items[i]));
    return ks;
  };
  if (op == "and") return Formula::conj(kids());
  if (op == "or") return Formula::disj(kids());
  if (op == "not") return Formula::negate(smt_to_formula(e.items.at(1)));
  if (op == "=>") return Formula::implies(smt_to_formula(e.items.at(1)), smt_to_formula(e.items.at(2)));
  if (op == "exists" || op == "forall") {
    std::vector<std::string> vs;
    for (const auto& b : e.items.at(1).items) vs.push_back(b.items.at(0).atom);
    Formula body = smt_to_formula(e.items.at(2));
    return op == "exists" ? Formula::exists(vs, body) : Formula::forall(vs, body);
  }
  if (op == "=" && e.items.size() == 3 && e.items[1].is_list && !e.items[1].items.empty() &&
      e.items[1].items[0].atom == "mod") {
    LinearTerm t = smt_to_term(e.items[1].items.at(1));
    Int d = smt_to_term(e.items[1].items.at(2)).constant();
    LinearTerm r = smt_to_term(e.items[2]);
    if (!r.is_constant() || r.constant() != 0) smt_fail("only (= (mod t d) 0) is supported");
    return Formula::divides(d, t);
  }
  static const std::map<std::string, AtomKind> rel = {
      {"=", AtomKind::EQ}, {"<=", AtomKind::LE}, {"<", AtomKind::LT}, {">=", AtomKind::GE}, {">", AtomKind::GT}};
  auto it = rel.find(op);
  if (it == rel.end() || e.items.size() != 3) smt_fail("unsupported operator '" + op + "'");
  return Formula::cmp(it->second, smt_to_term(e.items[1]), smt_to_term(e.items[2]));
}

}  // namespace

std::string to_smtlib(const Formula& f, const std::map<std::string, Sort>& sorts) {
  std::string out = "(set-logic LIA)\n";
  std::vector<Formula> hyps;
  for (const auto& v : f.free_vars()) {
    out += "(declare-const " + smt_symbol(v) + " Int)\n";
    auto it = sorts.find(v);
    if (it != sorts.end() && it->second == Sort::Nat)
      hyps.push_back(Formula::ge(LinearTerm::var(v), LinearTerm(0)));
  }
  Formula q = hyps.empty() ? f : Formula::implies(Formula::conj(hyps), f);
  out += "(assert (not " + smt_formula(q) + "))\n(check-sat)\n";
  return out;
}

Formula parse_smtlib(std::string_view src) {
  SmtReader r(src);
  std::vector<SExpr> asserts;
  for (const auto& cmd : r.read_all()) {
    if (!cmd.is_list || cmd.items.empty()) smt_fail("expected command");
    const std::string& head = cmd.items[0].atom;
    if (head == "assert") asserts.push_back(cmd.items.at(1));
    else if (head == "declare-const" || head == "set-logic" || head == "check-sat" || head == "set-info" ||
             head == "exit" || head == "get-model")
      continue;
    else smt_fail("unsupported command '" + head + "'");
  }
  if (asserts.size() == 1 && asserts[0].is_list && asserts[0].items.size() == 2 && !asserts[0].items[0].is_list &&
      asserts[0].items[0].atom == "not")
    return smt_to_formula(asserts[0].items[1]);
  std::vector<Formula> fs;
  for (const auto& a : asserts) fs.push_back(smt_to_formula(a));
  return Formula::conj(fs);
}

}  // namespace ptyck::pa
