#pragma once

// Method-call events exchanged between the interpreter and the automata.

#include <string>
#include <string_view>
#include <vector>

#include "ptyck/presburger.hpp"

namespace ptyck {

struct TraceEvent {
  std::string method;
  int receiver = 0;        // heap identity of the receiver
  std::string receiver_class;
  pa::Model pre;           // counters at call time
  pa::Model post;          // counters on return

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// One JSON object per line: {"method", "receiver", "class", "pre", "post"}.
/// "receiver" and "class" are optional on input.
std::string trace_to_jsonl(const std::vector<TraceEvent>& trace);
/// Throws std::invalid_argument naming the offending line.
std::vector<TraceEvent> parse_trace_jsonl(std::string_view text);

}  // namespace ptyck
