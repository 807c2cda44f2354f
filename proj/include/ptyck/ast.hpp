#pragma once

// Abstract syntax of `.pts` programs.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptyck/lexer.hpp"
#include "ptyck/presburger.hpp"

namespace ptyck::ast {

enum class Perm { None, Unique, Immutable };

const char* to_string(Perm p);

struct TypeExpr {
  enum class Kind { Void, Int, Bool, String, State, Pts, Wildcard };
  Kind kind = Kind::Void;
  Perm perm = Perm::None;
  std::string name;                // State: state name; Pts: family name
  std::vector<pa::Formula> args;   // Pts: conjoined constraints
  std::string state;               // Pts: regular typestate
  Span span;

  bool is_pts() const { return kind == Kind::Pts; }
  /// Conjunction of `args`.
  pa::Formula constraint() const;
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct FieldInit {
  std::string name;
  ExprPtr value;
};

struct Expr {
  enum class Kind { Int, Bool, String, Var, Field, Call, New, Unary, Binary };
  Kind kind = Kind::Int;
  Span span;

  std::int64_t int_value = 0;
  bool binary_literal = false;
  bool bool_value = false;
  // String: literal text; Var: name; Field/Call: member name; New: state;
  // Unary/Binary: operator.
  std::string text;
  // Field: [target]; Call: [receiver, args...] when has_receiver, else
  // [args...]; Unary: [operand]; Binary: [lhs, rhs].
  std::vector<ExprPtr> operands;
  bool has_receiver = false;

  // New only.
  bool has_constraint = false;
  std::vector<pa::Formula> constraint;
  bool has_inits = false;
  std::vector<FieldInit> inits;

  const ExprPtr& receiver() const { return operands.front(); }
  std::vector<ExprPtr> call_args() const {
    return has_receiver ? std::vector<ExprPtr>(operands.begin() + 1, operands.end()) : operands;
  }
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct MatchArm {
  // With a `*` scrutinee the pattern is a boolean guard expression,
  // otherwise it names a state.
  std::string pattern_state;
  ExprPtr guard;
  Block body;
  Span span;
};

struct Stmt {
  enum class Kind { VarDecl, Let, Assign, Update, Match, While, Skip, Return, Print, Expr, Block };
  Kind kind = Kind::Skip;
  Span span;

  // VarDecl: `var`/`val` [type] name [= init]
  bool is_val = false;
  std::optional<TypeExpr> type;
  std::string name;
  ExprPtr init;  // VarDecl/Let initializer; Return/Print/Expr payload; While condition

  // Assign: target = value; Update: target <- new_type
  ExprPtr target;
  ExprPtr value;
  std::optional<TypeExpr> new_type;

  // Match
  ExprPtr scrutinee;  // null means `*`
  std::vector<MatchArm> arms;
  Block default_body;

  // While
  std::optional<pa::Formula> invariant;

  // Let / While / Block
  Block body;
};

struct Param {
  TypeExpr type;
  std::optional<TypeExpr> post;  // `T >> T' a`
  std::string name;
  Span span;
};

struct EnvContract {
  TypeExpr pre;
  TypeExpr post;
  std::string target;  // empty for the receiver (first entry)
  Span span;
};

struct MethodDecl {
  TypeExpr return_type;
  std::string name;
  std::vector<Param> params;
  bool has_env = false;
  std::vector<EnvContract> env;
  Block body;
  Span span;

  /// Receiver contract when present.
  const EnvContract* receiver_contract() const { return env.empty() ? nullptr : &env.front(); }
};

struct FieldDecl {
  bool is_val = false;
  TypeExpr type;
  std::string name;
  ExprPtr init;
  Span span;
};

struct PtsDef {
  std::string name;
  std::vector<std::string> vars;
  std::optional<pa::Formula> constraint;
  std::string sort;  // state sort
  Span span;
};

struct StateDecl;

struct Member {
  enum class Kind { Field, Method, State, PtsDef };
  Kind kind = Kind::Field;
  std::shared_ptr<FieldDecl> field;
  std::shared_ptr<MethodDecl> method;
  std::shared_ptr<StateDecl> state;
  std::shared_ptr<PtsDef> pts;
  const Span& span() const;
  const std::string& name() const;
};

struct StateDecl {
  std::string name;
  std::optional<std::string> parent;
  std::vector<Member> members;
  Span span;
};

struct Program {
  std::vector<StateDecl> states;
  MethodDecl main;
  Span span;
};

/// Structural equality ignoring spans.
bool equal(const TypeExpr& a, const TypeExpr& b);
bool equal(const Expr& a, const Expr& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const Block& a, const Block& b);
bool equal(const MethodDecl& a, const MethodDecl& b);
bool equal(const StateDecl& a, const StateDecl& b);
bool equal(const Program& a, const Program& b);

/// Depth-first visit of every state declaration, nested ones included.
void for_each_state(const Program& p, const std::function<void(const StateDecl&)>& fn);

}  // namespace ptyck::ast
