#include "json.hpp"
#include "ptyck/typecheck.hpp"

namespace ptyck::check {

namespace {

nlohmann::ordered_json span_json(const Span& s) {
  return {{"line", s.line}, {"col", s.col}, {"end_line", s.end_line}, {"end_col", s.end_col}};
}

}  // namespace

int Report::exit_code() const {
  if (verdict == Verdict::Accepted) return 0;
  return needs_invariant() ? 2 : 1;
}

std::string Report::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["verdict"] = verdict == Verdict::Accepted ? "Accepted" : "Rejected";
  j["reason"] = reason ? nlohmann::ordered_json(*reason) : nlohmann::ordered_json(nullptr);
  auto& ds = j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& d : diagnostics) {
    nlohmann::ordered_json e;
    e["span"] = span_json(d.span);
    e["method"] = d.method;
    e["rule"] = d.rule;
    e["message"] = d.message;
    e["obligation"] = d.obligation.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(d.obligation);
    if (d.countermodel) {
      nlohmann::ordered_json m = nlohmann::ordered_json::object();
      for (const auto& [k, v] : *d.countermodel) m[k] = v;
      e["countermodel"] = m;
    } else {
      e["countermodel"] = nullptr;
    }
    ds.push_back(e);
  }
  auto& ls = j["invariant_log"] = nlohmann::ordered_json::array();
  for (const auto& r : invariant_log) {
    nlohmann::ordered_json e;
    e["span"] = span_json(r.span);
    e["method"] = r.method;
    e["mode"] = r.mode;
    e["formula"] = r.formula;
    e["inductive_entry"] = r.inductive_entry;
    e["inductive_step"] = r.inductive_step;
    e["adequate"] = r.adequate ? nlohmann::ordered_json(*r.adequate) : nlohmann::ordered_json(nullptr);
    if (!r.detail.empty()) e["detail"] = r.detail;
    ls.push_back(e);
  }
  return j.dump(indent);
}

std::string Report::to_text() const {
  std::string out = verdict == Verdict::Accepted ? "Accepted\n" : "Rejected";
  if (verdict == Verdict::Rejected) out += reason ? " (" + *reason + ")\n" : "\n";
  for (const auto& d : diagnostics) {
    out += d.span.str() + ": [" + d.rule + "] " + d.method + ": " + d.message + "\n";
    if (!d.obligation.empty()) out += "  obligation: " + d.obligation + "\n";
    if (d.countermodel) out += "  countermodel: " + pa::to_string(*d.countermodel) + "\n";
  }
  for (const auto& r : invariant_log) {
    out += "loop at " + r.span.str() + " in " + r.method + " (" + r.mode + "): ";
    out += r.formula.empty() ? "no invariant" : r.formula;
    out += std::string(" [entry ") + (r.inductive_entry ? "ok" : "fails") + ", step " +
           (r.inductive_step ? "ok" : "fails") + ", adequate " +
           (r.adequate ? (*r.adequate ? "yes" : "no") : "n/a") + "]";
    if (!r.detail.empty()) out += " " + r.detail;
    out += "\n";
  }
  return out;
}

}  // namespace ptyck::check
