#pragma once

// Types, contexts, the regular-typestate hierarchy and subtyping.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptyck/presburger.hpp"
#include "ptyck/solver.hpp"

namespace ptyck::types {

using pa::Formula;

/// Root of every hierarchy: the initial typestate.
inline const std::string kBottom = "⊥";

/// `case of` edges as a tree rooted at kBottom. Ordered so that a state is
/// below its ancestors: leq(child, parent) holds.
class StateHierarchy {
 public:
  StateHierarchy();

  /// Registers `name` under `parent` (kBottom when absent). Parents may be
  /// declared later; validate() checks the result.
  void add(const std::string& name, const std::optional<std::string>& parent = std::nullopt);
  bool contains(const std::string& name) const;
  /// Throws std::invalid_argument on unknown parents or cycles.
  void validate() const;

  const std::string& parent(const std::string& name) const;
  /// Path from `name` up to kBottom, both included.
  std::vector<std::string> ancestors(const std::string& name) const;
  /// `a` is `b` or a descendant of `b`.
  bool leq(const std::string& a, const std::string& b) const;
  /// Nearest common ancestor.
  std::string meet(const std::string& a, const std::string& b) const;
  std::vector<std::string> states() const;

 private:
  std::map<std::string, std::string> parent_;
};

enum class Permission { Unique, Immutable };
enum class BaseType { Void, Int, Bool, String };

const char* to_string(Permission p);
const char* to_string(BaseType b);

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  enum class Kind { Base, State, Transition, Function, Method, Permissioned, PtsProperty, PtsState };
  Kind kind = Kind::Base;

  BaseType base = BaseType::Void;
  std::string name;  // State: state name; PtsProperty/PtsState: family
  TypePtr from;      // Transition pre / Function argument / Permissioned payload
  TypePtr to;        // Transition post / Function result
  std::vector<Type> transitions;  // Method: env contracts (from = function)
  Permission perm = Permission::Unique;

  std::vector<std::string> index_vars;  // PtsProperty
  Formula phi;                          // PtsProperty constraint / PtsState formula
  std::string state;                    // PtsProperty sort / PtsState state

  static Type base_type(BaseType b);
  static Type state_type(const std::string& s);
  static Type transition(const Type& pre, const Type& post);
  static Type function(const Type& arg, const Type& result);
  static Type method(const Type& fn, std::vector<Type> env);
  static Type permissioned(Permission p, const Type& payload);
  static Type pts_property(const std::string& family, std::vector<std::string> vars, const Formula& constraint,
                           const std::string& sort);
  static Type pts_state(const std::string& family, const Formula& phi, const std::string& state);

  /// Strips a permission wrapper.
  const Type& payload() const { return kind == Kind::Permissioned ? *from : *this; }
  std::string str() const;
};

bool structurally_equal(const Type& a, const Type& b);

class NoMeet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conjunctive constraint store and scoped name-to-type map.
class TypingContext {
 public:
  TypingContext() : scopes_(1) {}

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }
  void bind(const std::string& name, Type t) { scopes_.back().insert_or_assign(name, std::move(t)); }
  /// Innermost binding.
  const Type* lookup(const std::string& name) const;
  /// Rebinds the innermost existing binding; returns false when unbound.
  bool rebind(const std::string& name, Type t);

  void assume(const Formula& f) { phi_.push_back(f); }
  const std::vector<Formula>& constraints() const { return phi_; }
  Formula constraint() const { return Formula::conj(phi_); }

 private:
  std::vector<std::map<std::string, Type>> scopes_;
  std::vector<Formula> phi_;
};

/// T-Sub: reflexivity, hierarchy, permissions (equal permission, covariant
/// payload) and, for p-typestate states, validity of `phi && phi1 => phi2`
/// with the state below the other's. May throw pa::BudgetExceeded.
bool subtype(const Formula& phi, const StateHierarchy& h, const Type& t1, const Type& t2,
             const pa::Limits& limits = {});

/// Mutual subtyping for p-typestate states, structural equality otherwise.
bool type_equal(const Formula& phi, const StateHierarchy& h, const Type& t1, const Type& t2,
                const pa::Limits& limits = {});

/// Join of branch types: p-typestate states of one family combine into the
/// disjunction of their formulas at the meet of their states. Other types
/// must be structurally identical. Throws NoMeet.
Type meet_types(const StateHierarchy& h, const std::vector<Type>& ts);

}  // namespace ptyck::types
