#include "ptyck/counters.hpp"

#include <set>

#include "json.hpp"
#include "ptyck/formula_io.hpp"
#include "ptyck/lexer.hpp"

namespace ptyck::counters {

using pa::AtomKind;
using pa::Limits;
using Kind = Formula::Kind;

std::string primed(const std::string& v) { return v + "'"; }

Action Action::from_term(const std::string& v, const LinearTerm& t) {
  if (t.is_constant()) return reset(t.constant());
  if (t.coeffs().size() == 1 && t.coeff(v) == 1) return translate(t.constant());
  return Action{Kind::Affine, 0, t};
}

LinearTerm Action::rhs(const std::string& v) const {
  switch (kind) {
    case Kind::Identity: return LinearTerm::var(v);
    case Kind::Translate: return LinearTerm::var(v) + LinearTerm(value);
    case Kind::Reset: return LinearTerm(value);
    case Kind::Affine: return expr;
  }
  return LinearTerm::var(v);
}

Action Transition::action_for(const std::string& v) const {
  auto it = actions.find(v);
  return it == actions.end() ? Action::identity() : it->second;
}

void CounterSystem::validate() const {
  std::set<std::string> st(states.begin(), states.end());
  std::set<std::string> vs(variables.begin(), variables.end());
  if (st.size() != states.size()) throw CounterSystemError("duplicate control state");
  if (vs.size() != variables.size()) throw CounterSystemError("duplicate counter");
  if (!st.count(initial_state)) throw CounterSystemError("unknown initial state '" + initial_state + "'");
  auto check_vars = [&](const Formula& f, const std::string& where) {
    for (const auto& v : f.free_vars())
      if (!vs.count(v)) throw CounterSystemError(where + " mentions unknown counter '" + v + "'");
  };
  check_vars(initial, "initial formula");
  std::set<std::string> names;
  for (const auto& t : transitions) {
    if (!names.insert(t.name).second) throw CounterSystemError("duplicate transition '" + t.name + "'");
    if (!st.count(t.source) || !st.count(t.target))
      throw CounterSystemError("transition '" + t.name + "' uses an unknown control state");
    check_vars(t.guard, "guard of '" + t.name + "'");
    for (const auto& [v, a] : t.actions) {
      if (!vs.count(v)) throw CounterSystemError("transition '" + t.name + "' updates unknown counter '" + v + "'");
      for (const auto& [w, c] : a.expr.coeffs())
        if (!vs.count(w)) throw CounterSystemError("transition '" + t.name + "' reads unknown counter '" + w + "'");
    }
  }
}

Formula CounterSystem::step_relation(const Transition& t) const {
  std::vector<Formula> parts{t.guard};
  for (const auto& v : variables)
    parts.push_back(Formula::eq(LinearTerm::var(primed(v)), t.action_for(v).rhs(v)));
  return Formula::conj(parts);
}

// ---------------------------------------------------------------- acceleration

namespace {

Int dot(const LinearTerm& t, const std::map<std::string, Int>& d) {
  Int s = 0;
  for (const auto& [v, c] : t.coeffs()) {
    auto it = d.find(v);
    if (it != d.end()) s = pa::checked_add(s, pa::checked_mul(c, it->second));
  }
  return s;
}

}  // namespace

Formula accelerate_transition(const CounterSystem& cs, const Transition& t, const Limits& limits) {
  if (!t.is_self_loop()) throw std::invalid_argument("transition '" + t.name + "' is not a self-loop");
  std::map<std::string, Int> d;
  for (const auto& v : cs.variables) {
    Action a = t.action_for(v);
    if (a.kind == Action::Kind::Reset || a.kind == Action::Kind::Affine)
      throw NonTranslationAction("transition '" + t.name + "' does not translate counter '" + v + "'");
    d[v] = a.kind == Action::Kind::Translate ? a.value : 0;
  }

  Formula g = pa::simplify(t.guard);
  for (const auto& c : pa::conjuncts(g)) {
    const Formula* atom = &c;
    if (c.kind() == Kind::Not && c.child().kind() == Kind::Atom) atom = &c.child();
    if (atom->kind() != Kind::Atom)
      throw NonTranslationAction("guard of '" + t.name + "' is not a conjunction of atoms");
    const pa::Atom& a = atom->atom_value();
    Int delta = dot(a.term, d);
    if (a.kind == AtomKind::NEQ && delta != 0)
      throw NonTranslationAction("guard of '" + t.name + "' has a disequality that varies along the loop");
    if (a.kind == AtomKind::DIVIDES && pa::mod_floor(delta, a.divisor) != 0)
      throw NonTranslationAction("guard of '" + t.name + "' has a divisibility atom that varies along the loop");
  }

  std::string k = pa::fresh_name("k");
  LinearTerm K = LinearTerm::var(k);
  std::vector<Formula> body{Formula::ge(K, LinearTerm(0))};
  std::map<std::string, LinearTerm> last;  // s + (k-1) d
  for (const auto& v : cs.variables) {
    body.push_back(Formula::eq(LinearTerm::var(primed(v)), LinearTerm::var(v) + K * d[v]));
    last[v] = LinearTerm::var(v) + K * d[v] - LinearTerm(d[v]);
  }
  // Guard atoms are affine in the iteration index, so checking the first and
  // the last iteration covers every one in between.
  body.push_back(Formula::disj({Formula::eq(K, LinearTerm(0)), Formula::conj({g, g.substitute(last)})}));
  return pa::eliminate_quantifiers(Formula::exists(k, Formula::conj(body)), limits);
}

// ----------------------------------------------------------------------- REACH

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::NotFlattable: return "NotFlattable";
    case FailureReason::NonTranslationAction: return "NonTranslationAction";
    case FailureReason::Timeout: return "Timeout";
  }
  return "?";
}

std::string ReachResult::to_json() const {
  nlohmann::ordered_json j;
  j["status"] = reached ? "reached" : "failed";
  j["reason"] = reached ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(to_string(reason));
  if (!detail.empty()) j["detail"] = detail;
  nlohmann::ordered_json rs = nlohmann::ordered_json::object();
  for (const auto& [s, f] : regions) rs[s] = f.str();
  j["regions"] = rs;
  return j.dump(2);
}

namespace {

struct Reacher {
  const CounterSystem& cs;
  Limits limits;
  std::map<std::string, std::string> unprime;
  std::vector<std::string> vars;

  Reacher(const CounterSystem& c, Limits l) : cs(c), limits(l), vars(c.variables) {
    for (const auto& v : vars) unprime[primed(v)] = v;
  }

  Formula post(const Formula& region, const Formula& rel) const {
    Formula img = pa::project(Formula::conj({region, rel}), vars, limits);
    return img.rename(unprime);
  }

  // Drops old disjuncts subsumed by the new part before joining.
  Formula join(const Formula& old, const Formula& add) const {
    std::vector<Formula> kept;
    for (const auto& d : pa::disjuncts(old))
      if (!pa::is_valid(Formula::implies(d, add), limits)) kept.push_back(d);
    kept.push_back(add);
    return pa::simplify(Formula::disj(kept));
  }
};

}  // namespace

ReachResult compute_reach(const CounterSystem& cs, const ReachOptions& opts) {
  cs.validate();
  auto deadline = std::chrono::steady_clock::now() + opts.budget;
  Limits limits;
  limits.per_query = opts.budget;
  limits.deadline = deadline;
  Reacher r(cs, limits);

  ReachResult res;
  auto fail = [&](FailureReason why, std::string detail) {
    ReachResult f;
    f.reason = why;
    f.detail = std::move(detail);
    return f;
  };

  try {
    std::map<std::string, Formula> accel;
    std::string unsupported;
    for (const auto& t : cs.transitions) {
      if (!t.is_self_loop()) continue;
      try {
        accel.emplace(t.name, accelerate_transition(cs, t, limits));
      } catch (const NonTranslationAction& e) {
        if (unsupported.empty()) unsupported = e.what();
      }
    }

    std::map<std::string, Formula> regions;
    for (const auto& s : cs.states) regions[s] = Formula::truth(false);
    regions[cs.initial_state] = pa::simplify(cs.initial);

    for (int round = 0;; ++round) {
      bool changed = false;
      for (const auto& t : cs.transitions) {
        if (std::chrono::steady_clock::now() > deadline)
          return fail(FailureReason::Timeout, "budget of " + std::to_string(opts.budget.count()) + " ms exhausted");
        const Formula& src = regions[t.source];
        if (src.is_false()) continue;
        auto it = accel.find(t.name);
        Formula img = r.post(src, it != accel.end() ? it->second : cs.step_relation(t));
        Formula& dst = regions[t.target];
        if (pa::is_valid(Formula::implies(img, dst), limits)) continue;
        dst = r.join(dst, img);
        changed = true;
      }
      if (!changed) break;
      if (round + 1 >= opts.unroll_depth) {
        if (!unsupported.empty())
          return fail(FailureReason::NonTranslationAction,
                      unsupported + "; bounded unrolling did not stabilize after " +
                          std::to_string(opts.unroll_depth) + " rounds");
        return fail(FailureReason::NotFlattable,
                    "no fixpoint after " + std::to_string(opts.unroll_depth) + " rounds of acceleration");
      }
    }
    res.reached = true;
    res.regions = std::move(regions);
    return res;
  } catch (const pa::BudgetExceeded& e) {
    return fail(FailureReason::Timeout, e.what());
  }
}

// ------------------------------------------------------------------ adequacy

namespace {

Formula prime_like(const Formula& phi, const Formula& rel) {
  auto rv = rel.free_vars();
  std::map<std::string, std::string> ren;
  for (const auto& v : phi.free_vars())
    if (rv.count(primed(v))) ren[v] = primed(v);
  return phi.rename(ren);
}

}  // namespace

AdequacyReport check_adequate_invariant(const Formula& phi_in, const Formula& guard, const Formula& body_rel,
                                        const Formula& exit_rel, const Formula& phi_post, const Formula& phi,
                                        const Limits& limits) {
  AdequacyReport r;
  r.inductive_entry = pa::is_valid(Formula::implies(phi_in, phi), limits);
  r.inductive_step =
      pa::is_valid(Formula::implies(Formula::conj({phi, guard, body_rel}), prime_like(phi, body_rel)), limits);
  r.adequate = pa::is_valid(
      Formula::implies(Formula::conj({phi, Formula::negate(guard), exit_rel}), prime_like(phi_post, exit_rel)),
      limits);
  return r;
}

// ------------------------------------------------------------------ extraction

CounterSystem extract_counter_system(const LoopSummary& loop, const Limits& limits) {
  CounterSystem cs;
  cs.states = {"loop"};
  cs.variables = loop.counters;
  cs.initial_state = "loop";
  cs.initial = loop.entry;
  std::vector<std::string> primes;
  for (const auto& v : loop.counters) primes.push_back(primed(v));

  int index = 0;
  for (const auto& p : loop.paths) {
    ++index;
    Formula rel = Formula::conj({loop.condition, p.relation});
    auto sat = pa::is_satisfiable(rel, limits);
    if (!sat.sat) continue;  // infeasible path
    Transition t;
    t.name = p.name.empty() ? "t" + std::to_string(index) : p.name;
    t.source = t.target = "loop";
    t.guard = pa::simplify(Formula::conj({loop.condition, pa::project(p.relation, primes, limits)}));
    const pa::Model& m = *sat.model;
    auto value = [&](const std::string& v) {
      auto it = m.find(v);
      return it == m.end() ? Int{0} : it->second;
    };
    for (const auto& v : loop.counters) {
      LinearTerm vp = LinearTerm::var(primed(v));
      Int c = pa::checked_add(value(primed(v)), -value(v));
      if (pa::is_valid(Formula::implies(rel, Formula::eq(vp, LinearTerm::var(v) + LinearTerm(c))), limits)) {
        if (c != 0) t.actions[v] = Action::translate(c);
        continue;
      }
      Int r = value(primed(v));
      if (pa::is_valid(Formula::implies(rel, Formula::eq(vp, LinearTerm(r))), limits)) {
        t.actions[v] = Action::reset(r);
        continue;
      }
      throw UnsupportedLoopShape("loop path " + t.name + " changes '" + v + "' by a non-constant amount");
    }
    cs.transitions.push_back(std::move(t));
  }
  return cs;
}

// ------------------------------------------------------------------ .pcs text

namespace {

std::vector<std::string> name_list(TokenStream& ts) {
  std::vector<std::string> out;
  do {
    out.push_back(ts.expect_ident());
  } while (ts.accept_punct(","));
  ts.expect_punct(";");
  return out;
}

void expect_word(TokenStream& ts, const char* w) {
  if (ts.peek().kind != TokenKind::Ident || ts.peek().text != w) ts.fail(std::string("expected '") + w + "'");
  ts.next();
}

Formula braced_formula(TokenStream& ts) {
  ts.expect_punct("{");
  Formula f = ts.peek().is_punct("}") ? Formula::truth(true) : pa::parse_formula(ts);
  ts.expect_punct("}");
  return f;
}

}  // namespace

CounterSystem parse_counter_system(std::string_view src) {
  TokenStream ts(tokenize(src));
  CounterSystem cs;
  bool have_initial = false;
  while (!ts.at_end()) {
    const Token& head = ts.peek();
    if (head.kind != TokenKind::Ident) ts.fail("expected 'vars', 'states', 'initial' or 'transition'");
    if (head.text == "vars") {
      ts.next();
      for (auto& v : name_list(ts)) cs.variables.push_back(v);
    } else if (head.text == "states") {
      ts.next();
      for (auto& s : name_list(ts)) cs.states.push_back(s);
    } else if (head.text == "initial") {
      Span at = ts.next().span;
      if (have_initial) throw SyntaxError(at, "duplicate initial declaration");
      have_initial = true;
      cs.initial_state = ts.expect_ident("state");
      cs.initial = braced_formula(ts);
    } else if (head.text == "transition") {
      ts.next();
      Transition t;
      t.name = ts.expect_ident("transition name");
      t.source = ts.expect_ident("state");
      ts.expect_punct("->");
      t.target = ts.expect_ident("state");
      ts.expect_punct("{");
      expect_word(ts, "guard");
      t.guard = braced_formula(ts);
      expect_word(ts, "action");
      ts.expect_punct("{");
      while (!ts.accept_punct("}")) {
        Span at = ts.peek().span;
        std::string lhs = ts.expect_ident("primed counter");
        if (lhs.size() < 2 || lhs.back() != '\'') throw SyntaxError(at, "action target must be a primed counter");
        std::string v = lhs.substr(0, lhs.size() - 1);
        ts.expect_punct("=");
        LinearTerm rhs = pa::parse_term(ts);
        ts.expect_punct(";");
        if (t.actions.count(v)) throw SyntaxError(at, "counter '" + v + "' updated twice");
        Action a = Action::from_term(v, rhs);
        if (a.kind != Action::Kind::Identity) t.actions[v] = a;
      }
      ts.expect_punct("}");
      cs.transitions.push_back(std::move(t));
    } else {
      ts.fail("expected 'vars', 'states', 'initial' or 'transition'");
    }
  }
  if (!have_initial) throw SyntaxError(ts.peek().span, "missing initial declaration");
  try {
    cs.validate();
  } catch (const CounterSystemError& e) {
    throw SyntaxError(ts.peek().span, e.what());
  }
  return cs;
}

std::string print_counter_system(const CounterSystem& cs) {
  auto join_names = [](const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
    return out;
  };
  std::string out;
  out += "vars " + join_names(cs.variables) + ";\n";
  out += "states " + join_names(cs.states) + ";\n";
  out += "initial " + cs.initial_state + " { " + cs.initial.str() + " }\n";
  for (const auto& t : cs.transitions) {
    out += "transition " + t.name + " " + t.source + " -> " + t.target + " {\n";
    out += "  guard { " + t.guard.str() + " }\n";
    out += "  action {";
    for (const auto& v : cs.variables) {
      Action a = t.action_for(v);
      if (a.kind == Action::Kind::Identity) continue;
      out += " " + primed(v) + " = " + a.rhs(v).str() + ";";
    }
    out += " }\n}\n";
  }
  return out;
}

}  // namespace ptyck::counters
