#pragma once

// Static verification of `.pts` programs: method bodies against their
// contracts, then main against the callees' contracts.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "ptyck/ast.hpp"
#include "ptyck/presburger.hpp"
#include "ptyck/solver.hpp"

namespace ptyck::check {

enum class InvariantMode { Annotated, Accelerate, Both };

const char* to_string(InvariantMode m);
std::optional<InvariantMode> parse_invariant_mode(const std::string& s);

struct Options {
  InvariantMode mode = InvariantMode::Both;
  std::chrono::milliseconds timeout{180000};
  std::size_t max_atoms = 100000;
};

enum class Verdict { Accepted, Rejected };

struct Diagnostic {
  Span span;
  std::string method;     // enclosing method
  std::string rule;       // typing rule that produced it
  std::string message;
  std::string obligation;                  // rendered obligation, empty for non-logical failures
  std::optional<pa::Formula> formula;      // the obligation itself (valid iff discharged)
  std::optional<pa::Model> countermodel;   // satisfies the obligation's negation
};

struct InvariantRecord {
  Span span;
  std::string method;
  std::string mode;  // "annotated" or "accelerated"
  std::string formula;
  bool inductive_entry = false;
  bool inductive_step = false;
  std::optional<bool> adequate;  // no failed obligation after the loop
  std::string detail;            // why acceleration failed, when it did
};

struct Report {
  Verdict verdict = Verdict::Accepted;
  /// Set when a loop needed an invariant that could not be obtained.
  std::optional<std::string> reason;
  std::vector<Diagnostic> diagnostics;
  std::vector<InvariantRecord> invariant_log;

  bool needs_invariant() const { return reason && *reason == "NeedsInvariant"; }
  /// 0 Accepted, 1 Rejected, 2 NeedsInvariant.
  int exit_code() const;
  std::string to_json(int indent = 2) const;
  std::string to_text() const;
};

/// Checks every method of every state, then main. Never throws for
/// verification failures; malformed programs yield diagnostics.
Report check_program(const ast::Program& p, const Options& opts = {});

}  // namespace ptyck::check
