#pragma once

// Presburger arithmetic: linear terms, atoms and quantified formulas over
// the integers. Formula values are immutable and cheap to copy.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptyck::pa {

using Int = std::int64_t;

/// Raised when an arithmetic result leaves the 64-bit range.
class ArithmeticOverflow : public std::overflow_error {
 public:
  ArithmeticOverflow() : std::overflow_error("integer overflow in linear arithmetic") {}
};

Int checked_add(Int a, Int b);
Int checked_mul(Int a, Int b);
Int floor_div(Int a, Int b);
Int mod_floor(Int a, Int b);
Int gcd(Int a, Int b);
Int lcm(Int a, Int b);

/// c0 + sum(c_i * x_i), stored with no zero coefficients.
class LinearTerm {
 public:
  LinearTerm() = default;
  explicit LinearTerm(Int constant) : constant_(constant) {}
  static LinearTerm var(const std::string& name, Int coeff = 1);

  const std::map<std::string, Int>& coeffs() const { return coeffs_; }
  Int constant() const { return constant_; }
  Int coeff(const std::string& v) const;
  bool is_constant() const { return coeffs_.empty(); }
  bool mentions(const std::string& v) const { return coeffs_.count(v) != 0; }

  void add_var(const std::string& v, Int c);
  void add_constant(Int c) { constant_ = checked_add(constant_, c); }
  LinearTerm without(const std::string& v) const;

  LinearTerm operator+(const LinearTerm& o) const;
  LinearTerm operator-(const LinearTerm& o) const;
  LinearTerm operator-() const;
  LinearTerm operator*(Int k) const;

  /// gcd of the variable coefficients (0 when constant).
  Int coeff_gcd() const;

  LinearTerm substitute(const std::map<std::string, LinearTerm>& binding) const;

  std::string str() const;

  friend bool operator==(const LinearTerm&, const LinearTerm&) = default;

 private:
  std::map<std::string, Int> coeffs_;
  Int constant_ = 0;
};

enum class AtomKind { LE, LT, EQ, NEQ, GE, GT, DIVIDES };

const char* to_string(AtomKind k);

/// `term <kind> 0`, or `divisor | term` for DIVIDES.
struct Atom {
  AtomKind kind = AtomKind::EQ;
  LinearTerm term;
  Int divisor = 0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Immutable formula tree. And/Or are n-ary.
class Formula {
 public:
  enum class Kind { True, False, Atom, Not, And, Or, Exists, Forall };

  Formula();  // True

  static Formula truth(bool v);
  static Formula atom(Atom a);
  static Formula cmp(AtomKind k, const LinearTerm& lhs, const LinearTerm& rhs);
  static Formula le(const LinearTerm& a, const LinearTerm& b) { return cmp(AtomKind::LE, a, b); }
  static Formula lt(const LinearTerm& a, const LinearTerm& b) { return cmp(AtomKind::LT, a, b); }
  static Formula ge(const LinearTerm& a, const LinearTerm& b) { return cmp(AtomKind::GE, a, b); }
  static Formula gt(const LinearTerm& a, const LinearTerm& b) { return cmp(AtomKind::GT, a, b); }
  static Formula eq(const LinearTerm& a, const LinearTerm& b) { return cmp(AtomKind::EQ, a, b); }
  static Formula neq(const LinearTerm& a, const LinearTerm& b) { return cmp(AtomKind::NEQ, a, b); }
  /// d | t; requires d >= 2.
  static Formula divides(Int d, const LinearTerm& t);
  static Formula negate(const Formula& f);
  static Formula conj(std::vector<Formula> fs);
  static Formula disj(std::vector<Formula> fs);
  static Formula exists(const std::string& v, const Formula& body);
  static Formula forall(const std::string& v, const Formula& body);
  static Formula exists(const std::vector<std::string>& vs, const Formula& body);
  static Formula forall(const std::vector<std::string>& vs, const Formula& body);
  static Formula implies(const Formula& a, const Formula& b);
  static Formula iff(const Formula& a, const Formula& b);

  Kind kind() const;
  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }
  bool is_quantifier() const { return kind() == Kind::Exists || kind() == Kind::Forall; }
  const Atom& atom_value() const;
  const std::vector<Formula>& children() const;
  const Formula& child() const;  // Not / quantifier body
  const std::string& bound_var() const;

  std::set<std::string> free_vars() const;
  bool quantifier_free() const;
  std::size_t atom_count() const;

  /// Capture-avoiding substitution of free variables.
  Formula substitute(const std::map<std::string, LinearTerm>& binding) const;
  Formula rename(const std::map<std::string, std::string>& names) const;

  /// Concrete syntax accepted by parse_formula.
  std::string str() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }
  friend bool operator<(const Formula& a, const Formula& b);
  friend int compare(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

int compare(const Formula& a, const Formula& b);

using Model = std::map<std::string, Int>;

std::string to_string(const Model& m);

class UnboundVariable : public std::runtime_error {
 public:
  explicit UnboundVariable(const std::string& v)
      : std::runtime_error("unbound variable '" + v + "' in evaluation"), var_(v) {}
  const std::string& var() const { return var_; }

 private:
  std::string var_;
};

Int evaluate(const LinearTerm& t, const Model& m);
bool evaluate(const Atom& a, const Model& m);

/// Finite domain used to interpret quantifiers by exhaustive search.
struct SearchDomain {
  Int lo;
  Int hi;
};

/// Truth of `f` under `m`. Quantifiers are rejected unless `domain` is given,
/// in which case they range over [lo, hi] (oracle mode).
bool evaluate(const Formula& f, const Model& m,
              std::optional<SearchDomain> domain = std::nullopt);

/// Fresh-name helper for generated variables; names contain '#', which the
/// concrete syntax never produces.
std::string fresh_name(const std::string& base);

/// Flat list of conjuncts (a non-And formula is a single conjunct).
std::vector<Formula> conjuncts(const Formula& f);
std::vector<Formula> disjuncts(const Formula& f);

}  // namespace ptyck::pa
