#include "ptyck/solver.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>
#include <tuple>

namespace ptyck::pa {

namespace {

using Kind = Formula::Kind;
using Coeffs = std::map<std::string, Int>;

Int iabs(Int a) {
  if (a == std::numeric_limits<Int>::min()) throw ArithmeticOverflow();
  return a < 0 ? -a : a;
}

Coeffs neg_coeffs(const Coeffs& u) {
  Coeffs r;
  for (const auto& [v, c] : u) r.emplace(v, checked_mul(c, -1));
  return r;
}

LinearTerm make_term(const Coeffs& u, Int c) {
  LinearTerm t(c);
  for (const auto& [v, k] : u) t.add_var(v, k);
  return t;
}

// ------------------------------------------------------------ atom normal form

Formula mk_le(const LinearTerm& t) {
  if (t.is_constant()) return Formula::truth(t.constant() <= 0);
  Int g = t.coeff_gcd();
  Int c = t.constant();
  if (g == 1) return Formula::atom(Atom{AtomKind::LE, t, 0});
  // g*u + c <= 0  <=>  u <= floor(-c / g)
  LinearTerm u;
  for (const auto& [v, k] : t.coeffs()) u.add_var(v, k / g);
  u.add_constant(-floor_div(checked_mul(c, -1), g));
  return Formula::atom(Atom{AtomKind::LE, u, 0});
}

// EQ and NEQ: divide by gcd, first coefficient positive.
Formula mk_eqlike(AtomKind k, const LinearTerm& t) {
  if (t.is_constant()) return Formula::truth((t.constant() == 0) == (k == AtomKind::EQ));
  Int g = t.coeff_gcd();
  if (t.constant() % g != 0) return Formula::truth(k == AtomKind::NEQ);
  if (t.coeffs().begin()->second < 0) g = -g;
  LinearTerm u(t.constant() / g);
  for (const auto& [v, c] : t.coeffs()) u.add_var(v, c / g);
  return Formula::atom(Atom{k, u, 0});
}

Int mod_inverse(Int a, Int m) {
  Int r0 = m, r1 = mod_floor(a, m), s0 = 0, s1 = 1;
  while (r1 != 0) {
    Int q = r0 / r1;
    std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
    std::tie(s0, s1) = std::make_pair(s1, s0 - q * s1);
  }
  return mod_floor(s0, m);
}

Formula mk_div(Int d, const LinearTerm& t, bool negated) {
  d = iabs(d);
  if (d == 0) throw std::invalid_argument("zero divisor");
  LinearTerm u(mod_floor(t.constant(), d));
  for (const auto& [v, c] : t.coeffs()) u.add_var(v, mod_floor(c, d));
  Int g = gcd(d, gcd(u.coeff_gcd(), u.constant()));
  if (g > 1) {
    LinearTerm w(u.constant() / g);
    for (const auto& [v, c] : u.coeffs()) w.add_var(v, c / g);
    u = w;
    d /= g;
  }
  // Leading coefficient to 1 when it is invertible mod d.
  if (d > 1 && !u.coeffs().empty()) {
    Int c0 = u.coeffs().begin()->second;
    if (c0 != 1 && gcd(c0, d) == 1) {
      Int inv = mod_inverse(c0, d);
      LinearTerm w(mod_floor(checked_mul(u.constant(), inv), d));
      for (const auto& [v, c] : u.coeffs()) w.add_var(v, mod_floor(checked_mul(c, inv), d));
      u = w;
    }
  }
  Formula a = Formula::divides(d, u);
  return negated ? Formula::negate(a) : a;
}

Formula normalize_atom(const Atom& a, bool neg) {
  const LinearTerm& t = a.term;
  LinearTerm one(1);
  switch (a.kind) {
    case AtomKind::LE: return neg ? mk_le(-t + one) : mk_le(t);
    case AtomKind::LT: return neg ? mk_le(-t) : mk_le(t + one);
    case AtomKind::GE: return neg ? mk_le(t + one) : mk_le(-t);
    case AtomKind::GT: return neg ? mk_le(t) : mk_le(-t + one);
    case AtomKind::EQ: return mk_eqlike(neg ? AtomKind::NEQ : AtomKind::EQ, t);
    case AtomKind::NEQ: return mk_eqlike(neg ? AtomKind::EQ : AtomKind::NEQ, t);
    case AtomKind::DIVIDES: return mk_div(a.divisor, t, neg);
  }
  return Formula::truth(true);
}

// ------------------------------------------------------- n-ary simplification

// A normalized literal viewed as (variable part, constant).
struct Lit {
  AtomKind kind;
  Coeffs u;
  Int c;
  Int d;
  bool neg;
};

std::optional<Lit> as_lit(const Formula& f) {
  if (f.kind() == Kind::Atom) {
    const Atom& a = f.atom_value();
    return Lit{a.kind, a.term.coeffs(), a.term.constant(), a.divisor, false};
  }
  if (f.kind() == Kind::Not && f.child().kind() == Kind::Atom &&
      f.child().atom_value().kind == AtomKind::DIVIDES) {
    const Atom& a = f.child().atom_value();
    return Lit{a.kind, a.term.coeffs(), a.term.constant(), a.divisor, true};
  }
  return std::nullopt;
}

struct LitTable {
  std::map<Coeffs, Int> le;
  std::map<Coeffs, std::set<Int>> eq;
  std::map<Coeffs, std::set<Int>> neq;
  std::set<std::tuple<Int, Coeffs, Int, bool>> divs;

  std::optional<Int> le_at(const Coeffs& u) const {
    auto it = le.find(u);
    if (it == le.end()) return std::nullopt;
    return it->second;
  }

  std::vector<Formula> atoms() const {
    std::vector<Formula> out;
    for (const auto& [u, c] : le) out.push_back(Formula::atom(Atom{AtomKind::LE, make_term(u, c), 0}));
    for (const auto& [u, cs] : eq)
      for (Int c : cs) out.push_back(Formula::atom(Atom{AtomKind::EQ, make_term(u, c), 0}));
    for (const auto& [u, cs] : neq)
      for (Int c : cs) out.push_back(Formula::atom(Atom{AtomKind::NEQ, make_term(u, c), 0}));
    for (const auto& [d, u, c, n] : divs) {
      Formula a = Formula::atom(Atom{AtomKind::DIVIDES, make_term(u, c), d});
      out.push_back(n ? Formula::negate(a) : a);
    }
    return out;
  }
};

void flatten_into(Kind k, const Formula& f, std::vector<Formula>& out) {
  if (f.kind() == k) {
    for (const auto& g : f.children()) flatten_into(k, g, out);
  } else {
    out.push_back(f);
  }
}

// Equality literals are sign normalized; le keys are not.
void add_eq_normalized(LitTable& t, const Coeffs& u, Int c) {
  if (u.begin()->second < 0) t.eq[neg_coeffs(u)].insert(checked_mul(c, -1));
  else t.eq[u].insert(c);
}

Formula mk_and(const std::vector<Formula>& kids) {
  std::vector<Formula> flat;
  for (const auto& k : kids) flatten_into(Kind::And, k, flat);
  LitTable t;
  std::set<Formula> others;
  for (const auto& f : flat) {
    if (f.is_true()) continue;
    if (f.is_false()) return f;
    auto l = as_lit(f);
    if (!l) {
      others.insert(f);
      continue;
    }
    switch (l->kind) {
      case AtomKind::LE: {
        auto [it, ins] = t.le.emplace(l->u, l->c);
        if (!ins) it->second = std::max(it->second, l->c);
        break;
      }
      case AtomKind::EQ: t.eq[l->u].insert(l->c); break;
      case AtomKind::NEQ: t.neq[l->u].insert(l->c); break;
      default:
        if (t.divs.count({l->d, l->u, l->c, !l->neg})) return Formula::truth(false);
        t.divs.insert({l->d, l->u, l->c, l->neg});
    }
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (auto& [u, cs] : t.eq) {
      if (cs.size() > 1) return Formula::truth(false);
      if (cs.empty()) continue;
      Int c = *cs.begin();
      if (auto it = t.neq.find(u); it != t.neq.end()) {
        if (it->second.count(c)) return Formula::truth(false);
        t.neq.erase(it);
      }
      if (auto c1 = t.le_at(u)) {
        if (checked_add(-c, *c1) > 0) return Formula::truth(false);
        t.le.erase(u);
      }
      Coeffs nu = neg_coeffs(u);
      if (auto c2 = t.le_at(nu)) {
        if (checked_add(c, *c2) > 0) return Formula::truth(false);
        t.le.erase(nu);
      }
    }
    for (auto it = t.le.begin(); it != t.le.end(); ++it) {
      Coeffs nu = neg_coeffs(it->first);
      auto jt = t.le.find(nu);
      if (jt == t.le.end()) continue;
      Int s = checked_add(it->second, jt->second);
      if (s > 0) return Formula::truth(false);
      if (s == 0) {
        add_eq_normalized(t, it->first, it->second);
        t.le.erase(jt);
        t.le.erase(it);
        changed = true;
        break;
      }
    }
    if (changed) continue;
    for (auto it = t.neq.begin(); it != t.neq.end() && !changed; ++it) {
      const Coeffs& u = it->first;
      Coeffs nu = neg_coeffs(u);
      for (Int c : std::set<Int>(it->second)) {
        // u <= -c1 and u != -c
        if (auto c1 = t.le_at(u)) {
          if (*c1 == c) {
            t.le[u] = checked_add(c, 1);
            it->second.erase(c);
            changed = true;
            continue;
          }
          if (c < *c1) { it->second.erase(c); continue; }
        }
        // u >= c2 and u != -c
        if (auto c2 = t.le_at(nu)) {
          if (*c2 == -c) {
            t.le[nu] = checked_add(*c2, 1);
            it->second.erase(c);
            changed = true;
            continue;
          }
          if (-c < *c2) { it->second.erase(c); continue; }
        }
      }
      if (it->second.empty()) {
        t.neq.erase(it);
        changed = true;
        break;
      }
    }
  }

  std::vector<Formula> atoms = t.atoms();
  std::set<Formula> atom_set(atoms.begin(), atoms.end());
  std::vector<Formula> out = atoms;
  for (const auto& o : others) {
    bool absorbed = false;
    if (o.kind() == Kind::Or)
      for (const auto& d : o.children())
        if (atom_set.count(d)) { absorbed = true; break; }
    if (!absorbed) out.push_back(o);
  }
  return Formula::conj(std::move(out));
}

Formula mk_or(const std::vector<Formula>& kids) {
  std::vector<Formula> flat;
  for (const auto& k : kids) flatten_into(Kind::Or, k, flat);
  LitTable t;
  std::set<Formula> others;
  for (const auto& f : flat) {
    if (f.is_false()) continue;
    if (f.is_true()) return f;
    auto l = as_lit(f);
    if (!l) {
      others.insert(f);
      continue;
    }
    switch (l->kind) {
      case AtomKind::LE: {
        auto [it, ins] = t.le.emplace(l->u, l->c);
        if (!ins) it->second = std::min(it->second, l->c);
        break;
      }
      case AtomKind::EQ: t.eq[l->u].insert(l->c); break;
      case AtomKind::NEQ:
        t.neq[l->u].insert(l->c);
        if (t.neq[l->u].size() > 1) return Formula::truth(true);
        break;
      default:
        if (t.divs.count({l->d, l->u, l->c, !l->neg})) return Formula::truth(true);
        t.divs.insert({l->d, l->u, l->c, l->neg});
    }
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = t.le.begin(); it != t.le.end(); ++it) {
      auto jt = t.le.find(neg_coeffs(it->first));
      if (jt != t.le.end() && checked_add(it->second, jt->second) <= 1) return Formula::truth(true);
    }
    for (auto& [u, cs] : t.neq) {
      if (cs.empty()) continue;
      Int c = *cs.begin();
      if (auto e = t.eq.find(u); e != t.eq.end()) {
        if (e->second.count(c)) return Formula::truth(true);
        t.eq.erase(e);
      }
      Coeffs nu = neg_coeffs(u);
      if (auto c1 = t.le_at(u)) {
        if (-c <= -*c1) return Formula::truth(true);
        t.le.erase(u);
      }
      if (auto c2 = t.le_at(nu)) {
        if (-c >= *c2) return Formula::truth(true);
        t.le.erase(nu);
      }
    }
    for (auto& [u, cs] : t.eq) {
      Coeffs nu = neg_coeffs(u);
      for (Int c : std::set<Int>(cs)) {
        Int v = checked_mul(c, -1);  // u == v
        if (auto c1 = t.le_at(u)) {  // u <= -c1
          if (v <= -*c1) { cs.erase(c); changed = true; continue; }
          if (v == -*c1 + 1) { t.le[u] = c; cs.erase(c); changed = true; continue; }
        }
        if (auto c2 = t.le_at(nu)) {  // u >= c2
          if (v >= *c2) { cs.erase(c); changed = true; continue; }
          if (v == *c2 - 1) { t.le[nu] = v; cs.erase(c); changed = true; continue; }
        }
      }
    }
    for (auto it = t.eq.begin(); it != t.eq.end();) {
      if (it->second.empty()) it = t.eq.erase(it);
      else ++it;
    }
  }

  std::vector<Formula> atoms = t.atoms();
  std::set<Formula> atom_set(atoms.begin(), atoms.end());
  std::vector<Formula> out = atoms;
  for (const auto& o : others) {
    bool absorbed = false;
    if (o.kind() == Kind::And)
      for (const auto& c : o.children())
        if (atom_set.count(c)) { absorbed = true; break; }
    if (!absorbed) out.push_back(o);
  }
  return Formula::disj(std::move(out));
}

Formula nnf(const Formula& f, bool neg) {
  switch (f.kind()) {
    case Kind::True:
    case Kind::False: return Formula::truth(f.is_true() != neg);
    case Kind::Atom: return normalize_atom(f.atom_value(), neg);
    case Kind::Not: return nnf(f.child(), !neg);
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> ks;
      ks.reserve(f.children().size());
      for (const auto& k : f.children()) ks.push_back(nnf(k, neg));
      bool conj = (f.kind() == Kind::And) != neg;
      return conj ? mk_and(ks) : mk_or(ks);
    }
    case Kind::Exists:
    case Kind::Forall: {
      bool ex = (f.kind() == Kind::Exists) != neg;
      Formula body = nnf(f.child(), neg);
      return ex ? Formula::exists(f.bound_var(), body) : Formula::forall(f.bound_var(), body);
    }
  }
  return f;
}

// ------------------------------------------------------------------ budget

struct Ctx {
  std::size_t max_atoms;
  std::chrono::steady_clock::time_point deadline;
  unsigned ticks = 0;

  explicit Ctx(const Limits& l) : max_atoms(l.max_atoms) {
    deadline = std::chrono::steady_clock::now() + l.per_query;
    if (l.deadline && *l.deadline < deadline) deadline = *l.deadline;
  }

  void check(const Formula& f) {
    if (f.atom_count() > max_atoms) throw BudgetExceeded("formula exceeds " + std::to_string(max_atoms) + " atoms");
    if ((++ticks & 15u) == 0 && std::chrono::steady_clock::now() > deadline) throw BudgetExceeded("time limit reached");
  }
};

// ------------------------------------------------------- Cooper elimination

template <class Fn>
Formula map_atoms(const Formula& f, Fn&& fn) {
  switch (f.kind()) {
    case Kind::True:
    case Kind::False: return f;
    case Kind::Atom: return fn(f.atom_value());
    case Kind::Not: return Formula::negate(map_atoms(f.child(), fn));
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> ks;
      ks.reserve(f.children().size());
      for (const auto& k : f.children()) ks.push_back(map_atoms(k, fn));
      return f.kind() == Kind::And ? Formula::conj(std::move(ks)) : Formula::disj(std::move(ks));
    }
    default: throw std::logic_error("map_atoms on quantified formula");
  }
}

void for_each_atom(const Formula& f, const std::function<void(const Atom&)>& fn) {
  if (f.kind() == Kind::Atom) {
    fn(f.atom_value());
    return;
  }
  for (const auto& k : f.children()) for_each_atom(k, fn);
}

Int x_lcm(const std::string& x, const Formula& f) {
  Int l = 1;
  for_each_atom(f, [&](const Atom& a) {
    Int b = a.term.coeff(x);
    if (b != 0) l = lcm(l, b);
  });
  return l;
}

// Rewrites every atom b*x + r (op) so that x's coefficient becomes sign(b):
// the atom is scaled by L/|b| and L*x is renamed to x.
Formula unit_scale(const std::string& x, const Formula& f, Int L) {
  return map_atoms(f, [&](const Atom& a) {
    Int b = a.term.coeff(x);
    if (b == 0) return Formula::atom(a);
    Int m = L / iabs(b);
    Atom s = a;
    s.term = a.term.without(x) * m;
    s.term.add_var(x, b > 0 ? 1 : -1);
    if (s.kind == AtomKind::DIVIDES) s.divisor = checked_mul(a.divisor, m);
    return Formula::atom(s);
  });
}

Formula elim_exists(const std::string& x, const Formula& body, Ctx& ctx);

// exists x. (a*x + t = 0) && rest
Formula solve_equality(const std::string& x, const Atom& eq, const std::vector<Formula>& rest, Ctx& ctx) {
  Int a = eq.term.coeff(x);
  LinearTerm t = eq.term.without(x);
  Formula phi = Formula::conj(rest);
  if (iabs(a) == 1) {
    LinearTerm val = t * (-a);
    return simplify(phi.substitute({{x, val}}));
  }
  Int L = lcm(iabs(a), x_lcm(x, phi));
  // L*x = e
  LinearTerm e = t * (-(a > 0 ? 1 : -1) * (L / iabs(a)));
  Formula scaled = unit_scale(x, phi, L);
  Formula out = Formula::conj({scaled.substitute({{x, e}}), Formula::divides(L, e)});
  ctx.check(out);
  return simplify(out);
}

Formula cooper(const std::string& x, const Formula& phi0, Ctx& ctx) {
  Int L = x_lcm(x, phi0);
  Formula phi = unit_scale(x, phi0, L);
  if (L > 1) phi = Formula::conj({phi, Formula::divides(L, LinearTerm::var(x))});

  Int delta = 1;
  std::set<LinearTerm, bool (*)(const LinearTerm&, const LinearTerm&)> lower(
      [](const LinearTerm& p, const LinearTerm& q) { return p.str() < q.str(); });
  auto upper = lower;
  for_each_atom(phi, [&](const Atom& a) {
    Int s = a.term.coeff(x);
    if (s == 0) return;
    LinearTerm r = a.term.without(x);
    switch (a.kind) {
      case AtomKind::LE:
        if (s > 0) upper.insert(-r + LinearTerm(1));  // x < -r + 1
        else lower.insert(r - LinearTerm(1));         // x > r - 1
        break;
      case AtomKind::EQ: {
        LinearTerm v = r * (-s);
        lower.insert(v - LinearTerm(1));
        upper.insert(v + LinearTerm(1));
        break;
      }
      case AtomKind::NEQ: {
        LinearTerm v = r * (-s);
        lower.insert(v);
        upper.insert(v);
        break;
      }
      case AtomKind::DIVIDES: delta = lcm(delta, a.divisor); break;
      default: throw std::logic_error("unnormalized atom in elimination");
    }
  });

  bool use_lower = lower.size() <= upper.size();
  Formula inf = map_atoms(phi, [&](const Atom& a) {
    Int s = a.term.coeff(x);
    if (s == 0 || a.kind == AtomKind::DIVIDES) return Formula::atom(a);
    switch (a.kind) {
      case AtomKind::LE: return Formula::truth(use_lower ? s > 0 : s < 0);
      case AtomKind::EQ: return Formula::truth(false);
      default: return Formula::truth(true);
    }
  });
  inf = simplify(inf);

  std::vector<Formula> parts;
  bool inf_has_x = inf.free_vars().count(x) != 0;
  for (Int j = 1; j <= (inf_has_x ? delta : 1); ++j) {
    Formula g = simplify(inf.substitute({{x, LinearTerm(use_lower ? j : -j)}}));
    if (g.is_true()) return g;
    parts.push_back(g);
  }
  for (const auto& bound : use_lower ? lower : upper) {
    for (Int j = 1; j <= delta; ++j) {
      LinearTerm at = bound + LinearTerm(use_lower ? j : -j);
      Formula g = simplify(phi.substitute({{x, at}}));
      ctx.check(g);
      if (g.is_true()) return g;
      parts.push_back(g);
    }
  }
  Formula out = mk_or(parts);
  ctx.check(out);
  return out;
}

Formula elim_exists(const std::string& x, const Formula& body, Ctx& ctx) {
  if (!body.free_vars().count(x)) return body;
  if (body.kind() == Kind::Or) {
    std::vector<Formula> parts;
    for (const auto& d : body.children()) {
      Formula g = elim_exists(x, d, ctx);
      if (g.is_true()) return g;
      parts.push_back(g);
    }
    Formula out = mk_or(parts);
    ctx.check(out);
    return out;
  }

  std::vector<Formula> with, without;
  for (const auto& c : conjuncts(body)) (c.free_vars().count(x) ? with : without).push_back(c);

  // Small disjunctive conjuncts are distributed so that equalities surface.
  std::size_t product = 1;
  std::size_t first_or = with.size();
  for (std::size_t i = 0; i < with.size(); ++i) {
    if (with[i].kind() == Kind::Or) {
      product *= with[i].children().size();
      if (first_or == with.size()) first_or = i;
    }
  }
  if (first_or < with.size() && product <= 64) {
    std::vector<Formula> parts;
    for (const auto& d : with[first_or].children()) {
      std::vector<Formula> cs = with;
      cs[first_or] = d;
      Formula g = elim_exists(x, mk_and(cs), ctx);
      if (g.is_true()) {
        parts = {g};
        break;
      }
      parts.push_back(g);
    }
    without.push_back(mk_or(parts));
    return mk_and(without);
  }

  const Atom* best = nullptr;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < with.size(); ++i) {
    if (with[i].kind() != Kind::Atom) continue;
    const Atom& a = with[i].atom_value();
    if (a.kind != AtomKind::EQ) continue;
    if (!best || iabs(a.term.coeff(x)) < iabs(best->term.coeff(x))) {
      best = &a;
      best_i = i;
    }
  }
  Formula eliminated;
  if (best) {
    std::vector<Formula> rest;
    for (std::size_t i = 0; i < with.size(); ++i)
      if (i != best_i) rest.push_back(with[i]);
    eliminated = solve_equality(x, *best, rest, ctx);
  } else {
    eliminated = cooper(x, mk_and(with), ctx);
  }
  without.push_back(eliminated);
  Formula out = mk_and(without);
  ctx.check(out);
  return out;
}

Formula elim(const Formula& f, Ctx& ctx) {
  switch (f.kind()) {
    case Kind::True:
    case Kind::False:
    case Kind::Atom: return simplify(f);
    case Kind::Not: return nnf(elim(f.child(), ctx), true);
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> ks;
      for (const auto& k : f.children()) ks.push_back(elim(k, ctx));
      return f.kind() == Kind::And ? mk_and(ks) : mk_or(ks);
    }
    case Kind::Exists: return elim_exists(f.bound_var(), elim(f.child(), ctx), ctx);
    case Kind::Forall: {
      Formula inner = nnf(elim(f.child(), ctx), true);
      return nnf(elim_exists(f.bound_var(), inner, ctx), true);
    }
  }
  return f;
}

template <class Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ArithmeticOverflow&) {
    throw BudgetExceeded("coefficient overflow");
  }
}

// Largest |constant| and lcm of divisors; bounds the search for a witness of
// a univariate normalized formula.
void witness_bound(const Formula& f, Int& m, Int& d) {
  for_each_atom(f, [&](const Atom& a) {
    m = std::max(m, iabs(a.term.constant()));
    if (a.kind == AtomKind::DIVIDES) d = lcm(d, a.divisor);
  });
}

}  // namespace

Formula simplify(const Formula& f) {
  return guarded([&] { return nnf(f, false); });
}

Formula eliminate_quantifiers(const Formula& f, const Limits& limits) {
  return guarded([&] {
    Ctx ctx(limits);
    return elim(f, ctx);
  });
}

Formula project(const Formula& f, const std::vector<std::string>& vars, const Limits& limits) {
  return eliminate_quantifiers(Formula::exists(vars, f), limits);
}

bool is_valid(const Formula& f, const Limits& limits) {
  auto fv = f.free_vars();
  Formula closed = Formula::forall(std::vector<std::string>(fv.begin(), fv.end()), f);
  Formula r = eliminate_quantifiers(closed, limits);
  if (!r.is_true() && !r.is_false()) throw std::logic_error("elimination left a non-ground formula: " + r.str());
  return r.is_true();
}

SatResult is_satisfiable(const Formula& f, const Limits& limits) {
  return guarded([&] {
    Ctx ctx(limits);
    Formula g = elim(f, ctx);
    auto fvs = g.free_vars();
    std::vector<std::string> vars(fvs.begin(), fvs.end());
    Formula closed = elim(Formula::exists(vars, g), ctx);
    if (closed.is_false()) return SatResult{false, std::nullopt};
    Model m;
    for (const auto& v : f.free_vars()) m[v] = 0;  // variables that vanished are unconstrained
    for (std::size_t i = 0; i < vars.size(); ++i) {
      std::vector<std::string> later(vars.begin() + static_cast<long>(i) + 1, vars.end());
      Formula h = elim(Formula::exists(later, g), ctx);
      Int bound = 0, delta = 1;
      witness_bound(h, bound, delta);
      Int limit = checked_add(checked_add(bound, delta), 1);
      bool found = false;
      for (Int k = 0; k <= limit && !found; ++k) {
        for (Int cand : {k, -k}) {
          if (evaluate(h, {{vars[i], cand}})) {
            m[vars[i]] = cand;
            g = simplify(g.substitute({{vars[i], LinearTerm(cand)}}));
            found = true;
            break;
          }
        }
      }
      if (!found) throw std::logic_error("no witness found for satisfiable formula");
    }
    return SatResult{true, m};
  });
}

bool equivalent(const Formula& a, const Formula& b, const Limits& limits) {
  return is_valid(Formula::iff(a, b), limits);
}

}  // namespace ptyck::pa
