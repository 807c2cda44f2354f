#pragma once

// Parameterized typestate property automata and trace acceptance.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptyck/presburger.hpp"
#include "ptyck/trace.hpp"

namespace ptyck::ptsa {

using pa::Formula;
using pa::Model;

/// Value domain of the counters. Metadata: no check consumes it except
/// that nat configurations must stay non-negative.
enum class Domain { Int, Nat };

struct GuardedTransition {
  std::string name;
  std::string source;
  std::string target;
  std::string action;
  Formula pre;   // unprimed counters only
  Formula post;  // counters and primed counters
};

class AutomatonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Automaton {
  std::string name;
  std::vector<std::string> counters;
  Domain domain = Domain::Int;
  std::vector<std::string> states;
  std::string initial_state;
  Formula initial;  // over counters
  std::set<std::string> accepting;
  std::set<std::string> alphabet;
  std::vector<GuardedTransition> transitions;

  /// Throws AutomatonError.
  void validate() const;
  /// At most one transition per (state, action) can fire from any valuation.
  bool is_deterministic() const;
};

struct Configuration {
  std::string state;
  Model counters;
  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

/// Successors of `c` under `e`: transitions on e.method whose pre holds at c
/// and whose post holds at (c, e.post as primed). The trace supplies the new
/// counters; nothing is computed.
std::vector<Configuration> successors(const Automaton& a, const Configuration& c, const TraceEvent& e);

/// First successor, if any.
std::optional<Configuration> step(const Automaton& a, const Configuration& c, const TraceEvent& e);

struct Acceptance {
  bool accepted = false;
  std::optional<std::size_t> failure_index;  // event with no successor, or trace size if the end is not accepting
  std::string reason;
};

/// Folds the configuration set from the initial state. Initial counters are
/// the first in-alphabet event's pre snapshot; they must satisfy `initial`.
/// Events whose method is outside the alphabet are skipped.
Acceptance accepts_trace(const Automaton& a, const std::vector<TraceEvent>& t);

/// Events grouped per receiver object, in order of first appearance.
std::vector<std::vector<TraceEvent>> split_by_receiver(const std::vector<TraceEvent>& t);

/// `.ptsa` text format.
Automaton parse_automaton(std::string_view src);
std::string print_automaton(const Automaton& a);

}  // namespace ptyck::ptsa
