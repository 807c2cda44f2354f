#pragma once

// Big-step interpreter for `.pts` programs with dynamic contract checks.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptyck/ast.hpp"
#include "ptyck/trace.hpp"

namespace ptyck::interp {

struct Value {
  enum class Kind { Unit, Int, Bool, String, Ref, Null };
  Kind kind = Kind::Unit;
  pa::Int i = 0;
  bool b = false;
  std::string s;
  int ref = 0;

  static Value unit() { return {}; }
  static Value integer(pa::Int v) { return {Kind::Int, v, false, {}, 0}; }
  static Value boolean(bool v) { return {Kind::Bool, 0, v, {}, 0}; }
  static Value string(std::string v) { return {Kind::String, 0, false, std::move(v), 0}; }
  static Value object(int r) { return {Kind::Ref, 0, false, {}, r}; }
  static Value null() { return {Kind::Null, 0, false, {}, 0}; }
  std::string str() const;
  friend bool operator==(const Value&, const Value&) = default;
};

struct Object {
  std::string cls;
  std::string state;  // dynamic typestate
  std::map<std::string, Value> fields;
  bool pts = false;   // carries a p-typestate tag
  std::string family;
  pa::Model counters;
};

struct Options {
  bool dynamic_checks = true;
  std::uint64_t seed = 0;
  /// Arm choices for successive `match (*)` statements; an index picks that
  /// arm if its guard holds, and the default otherwise. Once exhausted the
  /// seeded generator decides.
  std::vector<int> schedule;
  std::uint64_t step_limit = 1000000;
  std::ostream* out = nullptr;  // destination of print; captured either way
};

/// A failed contract check.
struct Violation {
  std::string method;
  std::string contract;  // the formula or typestate that failed
  std::string kind;      // "precondition", "postcondition", "instantiation", "update"
  pa::Model counters;
  Span span;
  std::string str() const;
};

struct RunResult {
  enum class Status { Ok, Violation, Error };
  Status status = Status::Ok;
  std::string message;
  std::optional<Violation> violation;
  std::vector<TraceEvent> trace;
  std::string output;
  Value exit;
  std::vector<int> choices;  // arm taken at each `match (*)`, -1 for default
};

class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(const Span& s, const std::string& msg) : std::runtime_error(s.str() + ": " + msg), span(s) {}
  Span span;
};

class ProtocolViolation : public std::runtime_error {
 public:
  explicit ProtocolViolation(Violation v) : std::runtime_error(v.str()), violation(std::move(v)) {}
  Violation violation;
};

/// Heap, environments and the call stack of one execution.
class Interpreter {
 public:
  Interpreter(const ast::Program& p, Options opts = {});
  ~Interpreter();
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  /// Evaluates in the current (initially global) frame. Throws RuntimeError
  /// or ProtocolViolation.
  Value eval(const ast::Expr& e);
  void execute(const ast::Stmt& s);
  const Value* lookup(const std::string& name) const;
  const Object& object(int ref) const;

  /// Runs main from an empty heap. Never throws.
  RunResult run_main();

  const std::vector<TraceEvent>& trace() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run_main(const ast::Program& p, const Options& opts = {});

}  // namespace ptyck::interp
