#include "ptyck/typesys.hpp"

#include <algorithm>
#include <set>

namespace ptyck::types {

StateHierarchy::StateHierarchy() { parent_[kBottom] = kBottom; }

void StateHierarchy::add(const std::string& name, const std::optional<std::string>& parent) {
  if (name == kBottom) throw std::invalid_argument("reserved state name");
  parent_[name] = parent.value_or(kBottom);
}

bool StateHierarchy::contains(const std::string& name) const { return parent_.count(name) != 0; }

void StateHierarchy::validate() const {
  for (const auto& [name, par] : parent_) {
    if (!contains(par)) throw std::invalid_argument("state '" + name + "' extends unknown state '" + par + "'");
    std::set<std::string> seen;
    std::string cur = name;
    while (cur != kBottom) {
      if (!seen.insert(cur).second) throw std::invalid_argument("cyclic case-of chain through '" + name + "'");
      auto it = parent_.find(cur);
      if (it == parent_.end()) break;
      cur = it->second;
    }
  }
}

const std::string& StateHierarchy::parent(const std::string& name) const {
  auto it = parent_.find(name);
  if (it == parent_.end()) throw std::invalid_argument("unknown state '" + name + "'");
  return it->second;
}

std::vector<std::string> StateHierarchy::ancestors(const std::string& name) const {
  std::vector<std::string> out{name};
  std::string cur = name;
  while (cur != kBottom) {
    cur = parent(cur);
    if (std::find(out.begin(), out.end(), cur) != out.end()) break;
    out.push_back(cur);
  }
  return out;
}

bool StateHierarchy::leq(const std::string& a, const std::string& b) const {
  if (a == b) return true;
  if (!contains(a) || !contains(b)) return false;
  auto up = ancestors(a);
  return std::find(up.begin(), up.end(), b) != up.end();
}

std::string StateHierarchy::meet(const std::string& a, const std::string& b) const {
  auto ua = ancestors(a);
  auto ub = ancestors(b);
  for (const auto& s : ua)
    if (std::find(ub.begin(), ub.end(), s) != ub.end()) return s;
  return kBottom;
}

std::vector<std::string> StateHierarchy::states() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : parent_) out.push_back(k);
  return out;
}

const char* to_string(Permission p) { return p == Permission::Unique ? "unique" : "immutable"; }

const char* to_string(BaseType b) {
  switch (b) {
    case BaseType::Void: return "void";
    case BaseType::Int: return "int";
    case BaseType::Bool: return "bool";
    default: return "string";
  }
}

Type Type::base_type(BaseType b) {
  Type t;
  t.kind = Kind::Base;
  t.base = b;
  return t;
}

Type Type::state_type(const std::string& s) {
  Type t;
  t.kind = Kind::State;
  t.name = s;
  return t;
}

Type Type::transition(const Type& pre, const Type& post) {
  Type t;
  t.kind = Kind::Transition;
  t.from = std::make_shared<Type>(pre);
  t.to = std::make_shared<Type>(post);
  return t;
}

Type Type::function(const Type& arg, const Type& result) {
  Type t = transition(arg, result);
  t.kind = Kind::Function;
  return t;
}

Type Type::method(const Type& fn, std::vector<Type> env) {
  Type t;
  t.kind = Kind::Method;
  t.from = std::make_shared<Type>(fn);
  t.transitions = std::move(env);
  return t;
}

Type Type::permissioned(Permission p, const Type& payload) {
  Type t;
  t.kind = Kind::Permissioned;
  t.perm = p;
  t.from = std::make_shared<Type>(payload.payload());
  return t;
}

Type Type::pts_property(const std::string& family, std::vector<std::string> vars, const Formula& constraint,
                        const std::string& sort) {
  Type t;
  t.kind = Kind::PtsProperty;
  t.name = family;
  t.index_vars = std::move(vars);
  t.phi = constraint;
  t.state = sort;
  return t;
}

Type Type::pts_state(const std::string& family, const Formula& phi, const std::string& state) {
  Type t;
  t.kind = Kind::PtsState;
  t.name = family;
  t.phi = phi;
  t.state = state;
  return t;
}

std::string Type::str() const {
  switch (kind) {
    case Kind::Base: return to_string(base);
    case Kind::State: return name;
    case Kind::Transition: return from->str() + " >> " + to->str();
    case Kind::Function: return "(" + from->str() + " -> " + to->str() + ")";
    case Kind::Method: {
      std::string s = from->str() + "[";
      for (std::size_t i = 0; i < transitions.size(); ++i) s += (i ? ", " : "") + transitions[i].str();
      return s + "]";
    }
    case Kind::Permissioned: return std::string(to_string(perm)) + " " + from->str();
    case Kind::PtsProperty: {
      std::string s = "Pi (";
      for (std::size_t i = 0; i < index_vars.size(); ++i) s += (i ? ", " : "") + index_vars[i];
      return s + " | " + phi.str() + ") -> " + state;
    }
    case Kind::PtsState: return name + "(" + phi.str() + ") -> " + state;
  }
  return {};
}

bool structurally_equal(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Type::Kind::Base: return a.base == b.base;
    case Type::Kind::State: return a.name == b.name;
    case Type::Kind::Transition:
    case Type::Kind::Function: return structurally_equal(*a.from, *b.from) && structurally_equal(*a.to, *b.to);
    case Type::Kind::Method:
      if (!structurally_equal(*a.from, *b.from) || a.transitions.size() != b.transitions.size()) return false;
      for (std::size_t i = 0; i < a.transitions.size(); ++i)
        if (!structurally_equal(a.transitions[i], b.transitions[i])) return false;
      return true;
    case Type::Kind::Permissioned: return a.perm == b.perm && structurally_equal(*a.from, *b.from);
    case Type::Kind::PtsProperty:
      return a.name == b.name && a.index_vars == b.index_vars && a.phi == b.phi && a.state == b.state;
    case Type::Kind::PtsState: return a.name == b.name && a.phi == b.phi && a.state == b.state;
  }
  return false;
}

bool subtype(const Formula& phi, const StateHierarchy& h, const Type& t1, const Type& t2, const pa::Limits& limits) {
  using K = Type::Kind;
  if (t1.kind == K::Permissioned || t2.kind == K::Permissioned) {
    if (t1.kind != t2.kind || t1.perm != t2.perm) return false;
    return subtype(phi, h, *t1.from, *t2.from, limits);
  }
  if (t1.kind == K::State && t2.kind == K::State) return h.leq(t1.name, t2.name);
  if (t1.kind == K::PtsState && t2.kind == K::PtsState) {
    if (t1.name != t2.name || !h.leq(t1.state, t2.state)) return false;
    return pa::is_valid(Formula::implies(Formula::conj({phi, t1.phi}), t2.phi), limits);
  }
  return structurally_equal(t1, t2);
}

bool type_equal(const Formula& phi, const StateHierarchy& h, const Type& t1, const Type& t2,
                const pa::Limits& limits) {
  const Type& a = t1.payload();
  const Type& b = t2.payload();
  if (a.kind == Type::Kind::PtsState && b.kind == Type::Kind::PtsState) {
    if (t1.kind != t2.kind || (t1.kind == Type::Kind::Permissioned && t1.perm != t2.perm)) return false;
    return a.name == b.name && a.state == b.state && subtype(phi, h, a, b, limits) && subtype(phi, h, b, a, limits);
  }
  return structurally_equal(t1, t2);
}

Type meet_types(const StateHierarchy& h, const std::vector<Type>& ts) {
  if (ts.empty()) throw NoMeet("meet of no types");
  if (ts.size() == 1) return ts.front();
  const Type& first = ts.front();
  const Type& p0 = first.payload();
  if (p0.kind == Type::Kind::PtsState) {
    std::vector<Formula> fs;
    std::string state = p0.state;
    for (const auto& t : ts) {
      const Type& p = t.payload();
      if (p.kind != Type::Kind::PtsState || p.name != p0.name) throw NoMeet("branches disagree on p-typestate family");
      if (t.kind != first.kind || (t.kind == Type::Kind::Permissioned && t.perm != first.perm))
        throw NoMeet("branches disagree on permission");
      fs.push_back(p.phi);
      state = h.meet(state, p.state);
    }
    Type out = Type::pts_state(p0.name, Formula::disj(fs), state);
    return first.kind == Type::Kind::Permissioned ? Type::permissioned(first.perm, out) : out;
  }
  if (p0.kind == Type::Kind::State) {
    std::string state = p0.name;
    for (const auto& t : ts) {
      if (t.kind != first.kind || t.payload().kind != Type::Kind::State) throw NoMeet("branch types differ");
      state = h.meet(state, t.payload().name);
    }
    Type out = Type::state_type(state);
    return first.kind == Type::Kind::Permissioned ? Type::permissioned(first.perm, out) : out;
  }
  for (const auto& t : ts)
    if (!structurally_equal(t, first)) throw NoMeet("branch types differ: " + first.str() + " vs " + t.str());
  return first;
}

const Type* TypingContext::lookup(const std::string& name) const {
  for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
    auto f = it->find(name);
    if (f != it->end()) return &f->second;
  }
  return nullptr;
}

bool TypingContext::rebind(const std::string& name, Type t) {
  for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
    auto f = it->find(name);
    if (f != it->end()) {
      f->second = std::move(t);
      return true;
    }
  }
  return false;
}

}  // namespace ptyck::types
