#include "ptyck/ptsa.hpp"

#include <algorithm>
#include <map>

#include "ptyck/formula_io.hpp"
#include "ptyck/lexer.hpp"
#include "ptyck/solver.hpp"

namespace ptyck::ptsa {

namespace {

std::string primed(const std::string& v) { return v + "'"; }

bool in(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

}  // namespace

void Automaton::validate() const {
  if (states.empty()) throw AutomatonError("automaton has no states");
  if (!in(states, initial_state)) throw AutomatonError("unknown initial state '" + initial_state + "'");
  for (const auto& s : accepting)
    if (!in(states, s)) throw AutomatonError("unknown accepting state '" + s + "'");
  for (const auto& v : initial.free_vars())
    if (!in(counters, v)) throw AutomatonError("initial formula mentions unknown counter '" + v + "'");
  for (const auto& t : transitions) {
    std::string where = "transition " + t.name + ": ";
    if (!in(states, t.source)) throw AutomatonError(where + "unknown state '" + t.source + "'");
    if (!in(states, t.target)) throw AutomatonError(where + "unknown state '" + t.target + "'");
    if (!alphabet.count(t.action)) throw AutomatonError(where + "action '" + t.action + "' is not in the alphabet");
    for (const auto& v : t.pre.free_vars())
      if (!in(counters, v)) throw AutomatonError(where + "pre mentions '" + v + "'");
    for (const auto& v : t.post.free_vars()) {
      std::string base = !v.empty() && v.back() == '\'' ? v.substr(0, v.size() - 1) : v;
      if (!in(counters, base)) throw AutomatonError(where + "post mentions '" + v + "'");
    }
  }
}

bool Automaton::is_deterministic() const {
  for (std::size_t i = 0; i < transitions.size(); ++i)
    for (std::size_t j = i + 1; j < transitions.size(); ++j) {
      const auto& a = transitions[i];
      const auto& b = transitions[j];
      if (a.source != b.source || a.action != b.action) continue;
      if (pa::is_satisfiable(Formula::conj({a.pre, b.pre, a.post, b.post})).sat) return false;
    }
  return true;
}

std::vector<Configuration> successors(const Automaton& a, const Configuration& c, const TraceEvent& e) {
  Model m;
  for (const auto& v : a.counters) {
    auto pre = c.counters.find(v);
    auto post = e.post.find(v);
    if (pre == c.counters.end() || post == e.post.end()) return {};
    m[v] = pre->second;
    m[primed(v)] = post->second;
  }
  if (a.domain == Domain::Nat)
    for (const auto& v : a.counters)
      if (m[primed(v)] < 0) return {};
  std::vector<Configuration> out;
  for (const auto& t : a.transitions) {
    if (t.source != c.state || t.action != e.method) continue;
    if (!pa::evaluate(t.pre, m) || !pa::evaluate(t.post, m)) continue;
    Configuration next{t.target, {}};
    for (const auto& v : a.counters) next.counters[v] = m[primed(v)];
    if (std::find(out.begin(), out.end(), next) == out.end()) out.push_back(std::move(next));
  }
  return out;
}

std::optional<Configuration> step(const Automaton& a, const Configuration& c, const TraceEvent& e) {
  auto s = successors(a, c, e);
  if (s.empty()) return std::nullopt;
  return s.front();
}

Acceptance accepts_trace(const Automaton& a, const std::vector<TraceEvent>& t) {
  Acceptance r;
  std::size_t first = 0;
  while (first < t.size() && !a.alphabet.count(t[first].method)) ++first;

  std::vector<Configuration> configs;
  if (first == t.size()) {
    // No relevant event: the initial state must accept some valuation.
    r.accepted = a.accepting.count(a.initial_state) && pa::is_satisfiable(a.initial).sat;
    if (!r.accepted) {
      r.failure_index = t.size();
      r.reason = "initial state is not accepting";
    }
    return r;
  }
  Configuration init{a.initial_state, {}};
  for (const auto& v : a.counters) {
    auto it = t[first].pre.find(v);
    if (it == t[first].pre.end()) {
      r.failure_index = first;
      r.reason = "event has no value for counter '" + v + "'";
      return r;
    }
    init.counters[v] = it->second;
  }
  if (!pa::evaluate(a.initial, init.counters)) {
    r.failure_index = first;
    r.reason = "initial counters " + pa::to_string(init.counters) + " violate " + a.initial.str();
    return r;
  }
  configs.push_back(init);

  for (std::size_t i = first; i < t.size(); ++i) {
    if (!a.alphabet.count(t[i].method)) continue;
    std::vector<Configuration> next;
    for (const auto& c : configs)
      for (auto& s : successors(a, c, t[i]))
        if (std::find(next.begin(), next.end(), s) == next.end()) next.push_back(std::move(s));
    if (next.empty()) {
      r.failure_index = i;
      r.reason = "no transition on " + t[i].method + " from " + configs.front().state + " " +
                 pa::to_string(configs.front().counters) + " to " + pa::to_string(t[i].post);
      return r;
    }
    configs = std::move(next);
  }
  for (const auto& c : configs)
    if (a.accepting.count(c.state)) {
      r.accepted = true;
      return r;
    }
  r.failure_index = t.size();
  r.reason = "trace ends in non-accepting state " + configs.front().state;
  return r;
}

std::vector<std::vector<TraceEvent>> split_by_receiver(const std::vector<TraceEvent>& t) {
  std::vector<std::vector<TraceEvent>> out;
  std::map<int, std::size_t> slot;
  for (const auto& e : t) {
    auto [it, fresh] = slot.try_emplace(e.receiver, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(e);
  }
  return out;
}

// ------------------------------------------------------------------ text

namespace {

std::vector<std::string> name_list(TokenStream& ts) {
  std::vector<std::string> out;
  do {
    out.push_back(ts.expect_ident());
  } while (ts.accept_punct(","));
  ts.expect_punct(";");
  return out;
}

bool at_word(TokenStream& ts, const char* w) {
  const Token& t = ts.peek();
  return (t.kind == TokenKind::Ident || t.kind == TokenKind::Keyword) && t.text == w;
}

void expect_word(TokenStream& ts, const char* w) {
  if (!at_word(ts, w)) ts.fail(std::string("expected '") + w + "'");
  ts.next();
}

Formula braced_formula(TokenStream& ts) {
  ts.expect_punct("{");
  Formula f = ts.peek().is_punct("}") ? Formula::truth(true) : pa::parse_formula(ts);
  ts.expect_punct("}");
  return f;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
  return out;
}

}  // namespace

Automaton parse_automaton(std::string_view src) {
  TokenStream ts(tokenize(src));
  Automaton a;
  bool have_initial = false, have_alphabet = false;
  std::set<std::string> used;
  while (!ts.at_end()) {
    Span at = ts.peek().span;
    if (at_word(ts, "automaton")) {
      ts.next();
      a.name = ts.expect_ident("automaton name");
      ts.expect_punct(";");
    } else if (at_word(ts, "vars")) {
      ts.next();
      for (auto& v : name_list(ts)) a.counters.push_back(v);
    } else if (at_word(ts, "domain")) {
      ts.next();
      if (at_word(ts, "int")) a.domain = Domain::Int;
      else if (at_word(ts, "nat")) a.domain = Domain::Nat;
      else ts.fail("expected 'int' or 'nat'");
      ts.next();
      ts.expect_punct(";");
    } else if (at_word(ts, "states")) {
      ts.next();
      for (auto& s : name_list(ts)) a.states.push_back(s);
    } else if (at_word(ts, "actions")) {
      ts.next();
      have_alphabet = true;
      for (auto& s : name_list(ts)) a.alphabet.insert(s);
    } else if (at_word(ts, "accepting")) {
      ts.next();
      for (auto& s : name_list(ts)) a.accepting.insert(s);
    } else if (at_word(ts, "initial")) {
      ts.next();
      if (have_initial) throw SyntaxError(at, "duplicate initial declaration");
      have_initial = true;
      a.initial_state = ts.expect_ident("state");
      a.initial = braced_formula(ts);
    } else if (at_word(ts, "transition")) {
      ts.next();
      GuardedTransition t;
      t.name = ts.expect_ident("transition name");
      t.source = ts.expect_ident("state");
      ts.expect_punct("->");
      t.target = ts.expect_ident("state");
      ts.expect_punct("{");
      expect_word(ts, "action");
      t.action = ts.expect_ident("action label");
      ts.expect_punct(";");
      if (at_word(ts, "pre")) {
        ts.next();
        t.pre = braced_formula(ts);
      }
      if (at_word(ts, "post")) {
        ts.next();
        t.post = braced_formula(ts);
      }
      ts.expect_punct("}");
      used.insert(t.action);
      a.transitions.push_back(std::move(t));
    } else {
      ts.fail("expected 'automaton', 'vars', 'domain', 'states', 'actions', 'initial', 'accepting' or 'transition'");
    }
  }
  if (!have_initial) throw SyntaxError(ts.peek().span, "missing initial declaration");
  if (!have_alphabet) a.alphabet = used;
  try {
    a.validate();
  } catch (const AutomatonError& e) {
    throw SyntaxError(ts.peek().span, e.what());
  }
  return a;
}

std::string print_automaton(const Automaton& a) {
  std::string out;
  if (!a.name.empty()) out += "automaton " + a.name + ";\n";
  out += "vars " + join(a.counters) + ";\n";
  out += std::string("domain ") + (a.domain == Domain::Nat ? "nat" : "int") + ";\n";
  out += "states " + join(a.states) + ";\n";
  out += "actions " + join({a.alphabet.begin(), a.alphabet.end()}) + ";\n";
  out += "initial " + a.initial_state + " { " + a.initial.str() + " }\n";
  if (!a.accepting.empty()) out += "accepting " + join({a.accepting.begin(), a.accepting.end()}) + ";\n";
  for (const auto& t : a.transitions) {
    out += "transition " + t.name + " " + t.source + " -> " + t.target + " {\n";
    out += "  action " + t.action + ";\n";
    out += "  pre { " + t.pre.str() + " }\n";
    out += "  post { " + t.post.str() + " }\n}\n";
  }
  return out;
}

}  // namespace ptyck::ptsa
