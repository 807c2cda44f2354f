#pragma once

// Decision procedure for Presburger arithmetic: normalization, Cooper-style
// quantifier elimination, validity and satisfiability with model extraction.
// Every function here is pure and safe to call concurrently.

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptyck/presburger.hpp"

namespace ptyck::pa {

/// Raised when elimination exceeds its atom or time budget. This is distinct
/// from a negative answer.
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& why) : std::runtime_error("solver budget exceeded: " + why) {}
};

struct Limits {
  std::size_t max_atoms = 100000;
  std::chrono::milliseconds per_query{10000};
  /// Hard cap shared by a batch of queries (e.g. a whole reachability run).
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Negation normal form with atoms rewritten to `t <= 0`, `t = 0`, `t != 0`
/// and (possibly negated) `d | t`, coefficients reduced by their gcd,
/// constants folded, duplicates and dominated bounds removed.
/// Equivalence preserving. Quantified subformulas are kept as they are.
Formula simplify(const Formula& f);

Formula eliminate_quantifiers(const Formula& f, const Limits& limits = {});

/// Quantifier-free equivalent of `exists vars. f`.
Formula project(const Formula& f, const std::vector<std::string>& vars, const Limits& limits = {});

/// True iff the universal closure of `f` holds over the integers.
bool is_valid(const Formula& f, const Limits& limits = {});

struct SatResult {
  bool sat = false;
  std::optional<Model> model;
};

/// Satisfiability of the existential closure. A returned model assigns every
/// free variable, preferring values of least absolute value (variables are
/// fixed in name order).
SatResult is_satisfiable(const Formula& f, const Limits& limits = {});

/// Mutual implication.
bool equivalent(const Formula& a, const Formula& b, const Limits& limits = {});

}  // namespace ptyck::pa
