// SPDX-License-Identifier: Apache-2.0
#include "stancegen/util/text_template.hpp"

#include "stancegen/util/jsonl.hpp"

namespace stancegen::util {

namespace {

bool is_slot_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls fn(literal) and slot(name) in document order.
template <typename Literal, typename Slot>
void scan(const std::string& body, Literal literal, Slot slot) {
  std::size_t i = 0;
  while (i < body.size()) {
    const std::size_t open = body.find('{', i);
    if (open == std::string::npos) {
      literal(body.substr(i));
      return;
    }
    std::size_t j = open + 1;
    while (j < body.size() && is_slot_char(body[j])) ++j;
    if (j < body.size() && body[j] == '}' && j > open + 1) {
      literal(body.substr(i, open - i));
      slot(body.substr(open + 1, j - open - 1));
      i = j + 1;
    } else {
      literal(body.substr(i, open + 1 - i));
      i = open + 1;
    }
  }
}

}  // namespace

TextTemplate::TextTemplate(std::string id, std::string body)
    : id_(std::move(id)), body_(std::move(body)) {
  scan(body_, [](const std::string&) {}, [&](const std::string& name) { ++slots_[name]; });
}

TextTemplate TextTemplate::load(const std::filesystem::path& path) {
  return TextTemplate(path.stem().string(), read_text(path));
}

std::vector<std::string> TextTemplate::lint(const std::set<std::string>& required,
                                            const std::set<std::string>& optional) const {
  std::vector<std::string> problems;
  for (const auto& name : required) {
    const auto it = slots_.find(name);
    if (it == slots_.end()) {
      problems.push_back("missing required slot {" + name + "}");
    } else if (it->second != 1) {
      problems.push_back("slot {" + name + "} appears " + std::to_string(it->second) + " times");
    }
  }
  for (const auto& [name, count] : slots_) {
    if (!required.contains(name) && !optional.contains(name)) {
      problems.push_back("unknown slot {" + name + "}");
    }
  }
  return problems;
}

std::string TextTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string out;
  out.reserve(body_.size() + 256);
  scan(
      body_, [&](const std::string& lit) { out += lit; },
      [&](const std::string& name) {
        if (const auto it = values.find(name); it != values.end()) out += it->second;
      });
  return out;
}

}  // namespace stancegen::util
