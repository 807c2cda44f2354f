#pragma once

// Textual front ends for Presburger formulas: the native `.pf` syntax and
// SMT-LIB 2 (QF and quantified LIA).

#include <map>
#include <string>
#include <string_view>

#include "ptyck/lexer.hpp"
#include "ptyck/presburger.hpp"

namespace ptyck::pa {

enum class Sort { Int, Nat };

/// Parses a formula (no sort declarations) from the whole input.
Formula parse_formula(std::string_view src);
LinearTerm parse_term(std::string_view src);

/// Stream entry points used by the other parsers. They stop at the first
/// token that cannot continue the formula.
Formula parse_formula(TokenStream& ts);
LinearTerm parse_term(TokenStream& ts);

/// A `.pf` file: optional `nat x, y; int z;` declarations then a formula.
struct FormulaDocument {
  std::map<std::string, Sort> sorts;
  Formula body;

  /// Conjunction of `x >= 0` for every variable declared nat.
  Formula sort_constraint() const;
  /// `sort_constraint() => body`; the formula whose validity is asked.
  Formula query() const;
};

FormulaDocument parse_formula_document(std::string_view src);

/// SMT-LIB script asserting the negation of the validity query, so that
/// `unsat` means valid.
std::string to_smtlib(const Formula& f, const std::map<std::string, Sort>& sorts = {});

/// Reads back a script produced by to_smtlib (declare-const / assert /
/// check-sat). Returns the conjunction of the assertions, with one outer
/// negation removed when the script asserts a single `(not ...)`.
Formula parse_smtlib(std::string_view src);

}  // namespace ptyck::pa
