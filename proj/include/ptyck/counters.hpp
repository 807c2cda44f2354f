#pragma once

// Integer counter systems for loops: exact acceleration of translation
// self-loops, forward reachability, and the adequate-invariant check.

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptyck/presburger.hpp"
#include "ptyck/solver.hpp"

namespace ptyck::counters {

using pa::Formula;
using pa::Int;
using pa::LinearTerm;

/// `v'` for a counter `v`.
std::string primed(const std::string& v);

struct Action {
  enum class Kind { Identity, Translate, Reset, Affine };
  Kind kind = Kind::Identity;
  Int value = 0;    // Translate / Reset
  LinearTerm expr;  // Affine: v' = expr (over unprimed counters)

  static Action identity() { return {}; }
  static Action translate(Int c) { return c == 0 ? identity() : Action{Kind::Translate, c, {}}; }
  static Action reset(Int c) { return Action{Kind::Reset, c, {}}; }
  /// Classifies `v' = t`, picking the most specific kind.
  static Action from_term(const std::string& v, const LinearTerm& t);

  /// Right-hand side of the update for counter `v`.
  LinearTerm rhs(const std::string& v) const;

  friend bool operator==(const Action&, const Action&) = default;
};

struct Transition {
  std::string name;
  std::string source;
  std::string target;
  Formula guard;
  std::map<std::string, Action> actions;  // absent means identity

  Action action_for(const std::string& v) const;
  bool is_self_loop() const { return source == target; }
};

class CounterSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a transition cannot be accelerated exactly.
class NonTranslationAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CounterSystem {
  std::vector<std::string> states;
  std::vector<std::string> variables;
  std::string initial_state;
  Formula initial;
  std::vector<Transition> transitions;

  /// Throws CounterSystemError on unknown states/variables or primed guards.
  void validate() const;

  /// `guard(v) && v'_i = rhs_i(v)` for every counter.
  Formula step_relation(const Transition& t) const;
};

/// Exact relation {(s, s') | s ->t^k s', k >= 0} over variables and their
/// primed copies, quantifier free. Only Translate/Identity actions are
/// accepted. The guard must be a conjunction; `!=` and divisibility atoms are
/// accepted only when the translation leaves them invariant.
Formula accelerate_transition(const CounterSystem& cs, const Transition& t, const pa::Limits& limits = {});

enum class FailureReason { NotFlattable, NonTranslationAction, Timeout };

const char* to_string(FailureReason r);

struct ReachResult {
  bool reached = false;
  FailureReason reason = FailureReason::Timeout;
  std::string detail;
  std::map<std::string, Formula> regions;  // per control state, when reached

  /// `{"status", "reason", "regions"}`.
  std::string to_json() const;
};

struct ReachOptions {
  std::chrono::milliseconds budget{180000};
  int unroll_depth = 64;
};

/// Never throws for solver trouble; failures are encoded in the result.
ReachResult compute_reach(const CounterSystem& cs, const ReachOptions& opts = {});

struct AdequacyReport {
  bool inductive_entry = false;
  bool inductive_step = false;
  bool adequate = false;
};

/// Entry: phi_in => phi. Step: phi && guard && body_rel => phi'.
/// Adequacy: phi && !guard && exit_rel => phi_post'. A variable is primed in
/// phi' (phi_post') exactly when its primed copy occurs in body_rel (exit_rel);
/// the others are loop constants.
AdequacyReport check_adequate_invariant(const Formula& phi_in, const Formula& guard, const Formula& body_rel,
                                        const Formula& exit_rel, const Formula& phi_post, const Formula& phi,
                                        const pa::Limits& limits = {});

/// Symbolic effect of one path through a loop body.
struct LoopPath {
  std::string name;
  Formula relation;  // over counters and primed counters
};

struct LoopSummary {
  std::vector<std::string> counters;
  Formula entry;      // over counters
  Formula condition;  // loop condition over counters
  std::vector<LoopPath> paths;
};

class UnsupportedLoopShape : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One control state `loop` with one self-loop per path. Each path must
/// update every counter by a constant translation or a constant reset; its
/// guard is the loop condition conjoined with the path's domain.
CounterSystem extract_counter_system(const LoopSummary& loop, const pa::Limits& limits = {});

/// `.pcs` text format.
CounterSystem parse_counter_system(std::string_view src);
std::string print_counter_system(const CounterSystem& cs);

}  // namespace ptyck::counters
