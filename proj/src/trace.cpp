#include "ptyck/trace.hpp"

#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ptyck {

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const auto& e : trace) {
    nlohmann::ordered_json j;
    j["method"] = e.method;
    j["receiver"] = e.receiver;
    j["class"] = e.receiver_class;
    j["pre"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.pre) j["pre"][k] = v;
    j["post"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.post) j["post"][k] = v;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<TraceEvent> parse_trace_jsonl(std::string_view text) {
  std::vector<TraceEvent> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TraceEvent e;
      e.method = j.at("method").get<std::string>();
      e.receiver = j.value("receiver", 0);
      e.receiver_class = j.value("class", std::string());
      auto model = [&](const char* key) {
        pa::Model m;
        if (j.contains(key))
          for (const auto& [k, v] : j.at(key).items()) m[k] = v.get<pa::Int>();
        return m;
      };
      e.pre = model("pre");
      e.post = model("post");
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw std::invalid_argument("trace line " + std::to_string(n) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace ptyck
