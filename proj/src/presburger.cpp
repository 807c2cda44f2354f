#include "ptyck/presburger.hpp"

#include <atomic>
#include <cstdlib>
#include <sstream>

namespace ptyck::pa {

Int checked_add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw ArithmeticOverflow();
  return r;
}

Int checked_mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw ArithmeticOverflow();
  return r;
}

Int floor_div(Int a, Int b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Int mod_floor(Int a, Int b) {
  Int r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

Int gcd(Int a, Int b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Int lcm(Int a, Int b) {
  if (a == 0 || b == 0) return 0;
  Int g = gcd(a, b);
  return checked_mul(a < 0 ? -a : a, (b < 0 ? -b : b) / g);
}

// ---------------------------------------------------------------- LinearTerm

LinearTerm LinearTerm::var(const std::string& name, Int coeff) {
  LinearTerm t;
  t.add_var(name, coeff);
  return t;
}

Int LinearTerm::coeff(const std::string& v) const {
  auto it = coeffs_.find(v);
  return it == coeffs_.end() ? 0 : it->second;
}

void LinearTerm::add_var(const std::string& v, Int c) {
  if (c == 0) return;
  auto [it, inserted] = coeffs_.emplace(v, c);
  if (!inserted) {
    it->second = checked_add(it->second, c);
    if (it->second == 0) coeffs_.erase(it);
  }
}

LinearTerm LinearTerm::without(const std::string& v) const {
  LinearTerm t = *this;
  t.coeffs_.erase(v);
  return t;
}

LinearTerm LinearTerm::operator+(const LinearTerm& o) const {
  LinearTerm t = *this;
  for (const auto& [v, c] : o.coeffs_) t.add_var(v, c);
  t.constant_ = checked_add(t.constant_, o.constant_);
  return t;
}

LinearTerm LinearTerm::operator-() const { return *this * -1; }

LinearTerm LinearTerm::operator-(const LinearTerm& o) const { return *this + (-o); }

LinearTerm LinearTerm::operator*(Int k) const {
  LinearTerm t;
  if (k == 0) return t;
  for (const auto& [v, c] : coeffs_) t.coeffs_.emplace(v, checked_mul(c, k));
  t.constant_ = checked_mul(constant_, k);
  return t;
}

Int LinearTerm::coeff_gcd() const {
  Int g = 0;
  for (const auto& [v, c] : coeffs_) g = gcd(g, c);
  return g;
}

LinearTerm LinearTerm::substitute(const std::map<std::string, LinearTerm>& binding) const {
  LinearTerm out(constant_);
  for (const auto& [v, c] : coeffs_) {
    auto it = binding.find(v);
    if (it == binding.end()) out.add_var(v, c);
    else out = out + it->second * c;
  }
  return out;
}

namespace {

void append_monomial(std::string& out, Int c, const std::string& v, bool first) {
  Int a = c < 0 ? -c : c;
  if (first) {
    if (c < 0) out += "-";
  } else {
    out += c < 0 ? " - " : " + ";
  }
  if (v.empty()) {
    out += std::to_string(a);
  } else {
    if (a != 1) out += std::to_string(a) + "*";
    out += v;
  }
}

}  // namespace

std::string LinearTerm::str() const {
  std::string out;
  bool first = true;
  for (const auto& [v, c] : coeffs_) {
    append_monomial(out, c, v, first);
    first = false;
  }
  if (constant_ != 0 || first) append_monomial(out, constant_, "", first);
  return out;
}

const char* to_string(AtomKind k) {
  switch (k) {
    case AtomKind::LE: return "<=";
    case AtomKind::LT: return "<";
    case AtomKind::EQ: return "=";
    case AtomKind::NEQ: return "!=";
    case AtomKind::GE: return ">=";
    case AtomKind::GT: return ">";
    case AtomKind::DIVIDES: return "div";
  }
  return "?";
}

namespace {

int compare_terms(const LinearTerm& a, const LinearTerm& b) {
  auto ia = a.coeffs().begin(), ib = b.coeffs().begin();
  for (; ia != a.coeffs().end() && ib != b.coeffs().end(); ++ia, ++ib) {
    if (int c = ia->first.compare(ib->first); c != 0) return c < 0 ? -1 : 1;
    if (ia->second != ib->second) return ia->second < ib->second ? -1 : 1;
  }
  if (ia != a.coeffs().end()) return 1;
  if (ib != b.coeffs().end()) return -1;
  if (a.constant() != b.constant()) return a.constant() < b.constant() ? -1 : 1;
  return 0;
}

int compare_atoms(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.divisor != b.divisor) return a.divisor < b.divisor ? -1 : 1;
  return compare_terms(a.term, b.term);
}

}  // namespace

// ------------------------------------------------------------------- Formula

struct Formula::Node {
  Kind kind = Kind::True;
  Atom atom;
  std::vector<Formula> kids;
  std::string var;
};

Formula::Formula() : Formula(truth(true)) {}

Formula Formula::truth(bool v) {
  static const auto t = std::make_shared<const Node>(Node{Kind::True, {}, {}, {}});
  static const auto f = std::make_shared<const Node>(Node{Kind::False, {}, {}, {}});
  return Formula(v ? t : f);
}

Formula Formula::atom(Atom a) {
  if (a.kind == AtomKind::DIVIDES) {
    if (a.divisor < 1) throw std::invalid_argument("divisibility atom needs a positive divisor");
    if (a.divisor == 1) return truth(true);
    if (a.term.is_constant()) return truth(mod_floor(a.term.constant(), a.divisor) == 0);
  } else if (a.term.is_constant()) {
    return truth(evaluate(a, {}));
  }
  return Formula(std::make_shared<const Node>(Node{Kind::Atom, std::move(a), {}, {}}));
}

Formula Formula::cmp(AtomKind k, const LinearTerm& lhs, const LinearTerm& rhs) {
  return atom(Atom{k, lhs - rhs, 0});
}

Formula Formula::divides(Int d, const LinearTerm& t) {
  if (d < 0) d = -d;
  return atom(Atom{AtomKind::DIVIDES, t, d});
}

Formula Formula::negate(const Formula& f) {
  switch (f.kind()) {
    case Kind::True: return truth(false);
    case Kind::False: return truth(true);
    case Kind::Not: return f.child();
    default: return Formula(std::make_shared<const Node>(Node{Kind::Not, {}, {f}, {}}));
  }
}

Formula Formula::conj(std::vector<Formula> fs) {
  std::vector<Formula> flat;
  for (auto& f : fs) {
    if (f.is_true()) continue;
    if (f.is_false()) return truth(false);
    if (f.kind() == Kind::And) {
      for (const auto& g : f.children()) flat.push_back(g);
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (flat.empty()) return truth(true);
  if (flat.size() == 1) return flat.front();
  return Formula(std::make_shared<const Node>(Node{Kind::And, {}, std::move(flat), {}}));
}

Formula Formula::disj(std::vector<Formula> fs) {
  std::vector<Formula> flat;
  for (auto& f : fs) {
    if (f.is_false()) continue;
    if (f.is_true()) return truth(true);
    if (f.kind() == Kind::Or) {
      for (const auto& g : f.children()) flat.push_back(g);
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (flat.empty()) return truth(false);
  if (flat.size() == 1) return flat.front();
  return Formula(std::make_shared<const Node>(Node{Kind::Or, {}, std::move(flat), {}}));
}

Formula Formula::exists(const std::string& v, const Formula& body) {
  if (body.kind() == Kind::True || body.kind() == Kind::False) return body;
  return Formula(std::make_shared<const Node>(Node{Kind::Exists, {}, {body}, v}));
}

Formula Formula::forall(const std::string& v, const Formula& body) {
  if (body.kind() == Kind::True || body.kind() == Kind::False) return body;
  return Formula(std::make_shared<const Node>(Node{Kind::Forall, {}, {body}, v}));
}

Formula Formula::exists(const std::vector<std::string>& vs, const Formula& body) {
  Formula f = body;
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) f = exists(*it, f);
  return f;
}

Formula Formula::forall(const std::vector<std::string>& vs, const Formula& body) {
  Formula f = body;
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) f = forall(*it, f);
  return f;
}

Formula Formula::implies(const Formula& a, const Formula& b) { return disj({negate(a), b}); }

Formula Formula::iff(const Formula& a, const Formula& b) {
  return conj({implies(a, b), implies(b, a)});
}

Formula::Kind Formula::kind() const { return node_->kind; }
const Atom& Formula::atom_value() const { return node_->atom; }
const std::vector<Formula>& Formula::children() const { return node_->kids; }
const Formula& Formula::child() const { return node_->kids.front(); }
const std::string& Formula::bound_var() const { return node_->var; }

namespace {

void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return;
    case Formula::Kind::Atom:
      for (const auto& [v, c] : f.atom_value().term.coeffs())
        if (!bound.count(v)) out.insert(v);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool added = bound.insert(f.bound_var()).second;
      collect_free(f.child(), bound, out);
      if (added) bound.erase(f.bound_var());
      return;
    }
    default:
      for (const auto& k : f.children()) collect_free(k, bound, out);
  }
}

void collect_all_names(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      for (const auto& [v, c] : f.atom_value().term.coeffs()) out.insert(v);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      out.insert(f.bound_var());
      collect_all_names(f.child(), out);
      return;
    default:
      for (const auto& k : f.children()) collect_all_names(k, out);
  }
}

}  // namespace

std::set<std::string> Formula::free_vars() const {
  std::set<std::string> bound, out;
  collect_free(*this, bound, out);
  return out;
}

bool Formula::quantifier_free() const {
  if (is_quantifier()) return false;
  for (const auto& k : children())
    if (!k.quantifier_free()) return false;
  return true;
}

std::size_t Formula::atom_count() const {
  if (kind() == Kind::Atom) return 1;
  std::size_t n = 0;
  for (const auto& k : children()) n += k.atom_count();
  return n;
}

Formula Formula::substitute(const std::map<std::string, LinearTerm>& binding) const {
  if (binding.empty()) return *this;
  switch (kind()) {
    case Kind::True:
    case Kind::False: return *this;
    case Kind::Atom: {
      Atom a = atom_value();
      a.term = a.term.substitute(binding);
      return atom(std::move(a));
    }
    case Kind::Not: return negate(child().substitute(binding));
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> ks;
      ks.reserve(children().size());
      for (const auto& k : children()) ks.push_back(k.substitute(binding));
      return kind() == Kind::And ? conj(std::move(ks)) : disj(std::move(ks));
    }
    case Kind::Exists:
    case Kind::Forall: {
      const std::string& v = bound_var();
      std::map<std::string, LinearTerm> inner = binding;
      inner.erase(v);
      // Only bindings for variables actually free in the body matter.
      std::set<std::string> body_free = child().free_vars();
      for (auto it = inner.begin(); it != inner.end();) {
        if (!body_free.count(it->first)) it = inner.erase(it);
        else ++it;
      }
      if (inner.empty()) return *this;
      bool captures = false;
      for (const auto& [x, t] : inner)
        if (t.mentions(v)) captures = true;
      std::string nv = v;
      Formula body = child();
      if (captures) {
        std::set<std::string> used;
        collect_all_names(body, used);
        for (const auto& [x, t] : inner) {
          used.insert(x);
          for (const auto& [y, c] : t.coeffs()) used.insert(y);
        }
        do { nv += "'"; } while (used.count(nv));
        body = body.substitute({{v, LinearTerm::var(nv)}});
      }
      body = body.substitute(inner);
      return kind() == Kind::Exists ? exists(nv, body) : forall(nv, body);
    }
  }
  return *this;
}

Formula Formula::rename(const std::map<std::string, std::string>& names) const {
  std::map<std::string, LinearTerm> b;
  for (const auto& [from, to] : names) b.emplace(from, LinearTerm::var(to));
  return substitute(b);
}

int compare(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return 0;
    case Formula::Kind::Atom: return compare_atoms(a.atom_value(), b.atom_value());
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      if (int c = a.bound_var().compare(b.bound_var()); c != 0) return c < 0 ? -1 : 1;
      return compare(a.child(), b.child());
    default: {
      const auto& ka = a.children();
      const auto& kb = b.children();
      for (std::size_t i = 0; i < ka.size() && i < kb.size(); ++i)
        if (int c = compare(ka[i], kb[i]); c != 0) return c;
      if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
      return 0;
    }
  }
}

bool operator==(const Formula& a, const Formula& b) { return compare(a, b) == 0; }
bool operator<(const Formula& a, const Formula& b) { return compare(a, b) < 0; }

// ------------------------------------------------------------------ printing

namespace {

std::string atom_str(const Atom& a) {
  if (a.kind == AtomKind::DIVIDES) return "div(" + std::to_string(a.divisor) + ", " + a.term.str() + ")";
  LinearTerm lhs, rhs;
  for (const auto& [v, c] : a.term.coeffs()) {
    if (c > 0) lhs.add_var(v, c);
    else rhs.add_var(v, -c);
  }
  if (a.term.constant() > 0) lhs.add_constant(a.term.constant());
  else rhs.add_constant(-a.term.constant());
  const char* op = a.kind == AtomKind::EQ ? "==" : to_string(a.kind);
  return lhs.str() + " " + op + " " + rhs.str();
}

int precedence(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: return 0;
    case Formula::Kind::Or: return 1;
    case Formula::Kind::And: return 2;
    case Formula::Kind::Not: return 3;
    default: return 4;
  }
}

void print(const Formula& f, int ctx, std::string& out) {
  bool paren = precedence(f) < ctx;
  if (paren) out += "(";
  switch (f.kind()) {
    case Formula::Kind::True: out += "true"; break;
    case Formula::Kind::False: out += "false"; break;
    case Formula::Kind::Atom: out += atom_str(f.atom_value()); break;
    case Formula::Kind::Not:
      out += "!";
      print(f.child(), 5, out);
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const char* sep = f.kind() == Formula::Kind::And ? " && " : " || ";
      int p = precedence(f) + 1;
      bool first = true;
      for (const auto& k : f.children()) {
        if (!first) out += sep;
        first = false;
        print(k, p, out);
      }
      break;
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      out += f.kind() == Formula::Kind::Exists ? "exists " : "forall ";
      out += f.bound_var();
      out += ". ";
      print(f.child(), 0, out);
      break;
  }
  if (paren) out += ")";
}

}  // namespace

std::string Formula::str() const {
  std::string out;
  print(*this, 0, out);
  return out;
}

std::string to_string(const Model& m) {
  std::string out = "{";
  bool first = true;
  for (const auto& [v, x] : m) {
    if (!first) out += ", ";
    first = false;
    out += v + " = " + std::to_string(x);
  }
  return out + "}";
}

// ---------------------------------------------------------------- evaluation

Int evaluate(const LinearTerm& t, const Model& m) {
  Int acc = t.constant();
  for (const auto& [v, c] : t.coeffs()) {
    auto it = m.find(v);
    if (it == m.end()) throw UnboundVariable(v);
    acc = checked_add(acc, checked_mul(c, it->second));
  }
  return acc;
}

bool evaluate(const Atom& a, const Model& m) {
  Int x = evaluate(a.term, m);
  switch (a.kind) {
    case AtomKind::LE: return x <= 0;
    case AtomKind::LT: return x < 0;
    case AtomKind::EQ: return x == 0;
    case AtomKind::NEQ: return x != 0;
    case AtomKind::GE: return x >= 0;
    case AtomKind::GT: return x > 0;
    case AtomKind::DIVIDES: return mod_floor(x, a.divisor) == 0;
  }
  return false;
}

namespace {

bool eval_rec(const Formula& f, Model& m, const std::optional<SearchDomain>& dom) {
  switch (f.kind()) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Atom: return evaluate(f.atom_value(), m);
    case Formula::Kind::Not: return !eval_rec(f.child(), m, dom);
    case Formula::Kind::And:
      for (const auto& k : f.children())
        if (!eval_rec(k, m, dom)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& k : f.children())
        if (eval_rec(k, m, dom)) return true;
      return false;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      if (!dom) throw std::invalid_argument("cannot evaluate quantified formula without a search domain");
      const std::string& v = f.bound_var();
      std::optional<Int> saved;
      if (auto it = m.find(v); it != m.end()) saved = it->second;
      bool want = f.kind() == Formula::Kind::Exists;
      bool result = !want;
      for (Int x = dom->lo; x <= dom->hi; ++x) {
        m[v] = x;
        if (eval_rec(f.child(), m, dom) == want) {
          result = want;
          break;
        }
      }
      if (saved) m[v] = *saved;
      else m.erase(v);
      return result;
    }
  }
  return false;
}

}  // namespace

bool evaluate(const Formula& f, const Model& m, std::optional<SearchDomain> domain) {
  Model scratch = m;
  return eval_rec(f, scratch, domain);
}

std::string fresh_name(const std::string& base) {
  static std::atomic<std::uint64_t> counter{0};
  return base + "#" + std::to_string(++counter);
}

std::vector<Formula> conjuncts(const Formula& f) {
  if (f.kind() == Formula::Kind::And) return f.children();
  if (f.is_true()) return {};
  return {f};
}

std::vector<Formula> disjuncts(const Formula& f) {
  if (f.kind() == Formula::Kind::Or) return f.children();
  if (f.is_false()) return {};
  return {f};
}

}  // namespace ptyck::pa
