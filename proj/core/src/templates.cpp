// SPDX-License-Identifier: Apache-2.0
#include "stancegen/templates.hpp"

#include <algorithm>

#include "stancegen/error.hpp"

namespace stancegen {

namespace detail {
const std::map<std::string, std::string>& builtin_template_table();
}

std::optional<std::string> builtin_template(const std::string& id) {
  const auto& t = detail::builtin_template_table();
  const auto it = t.find(id);
  if (it == t.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> builtin_template_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, body] : detail::builtin_template_table()) ids.push_back(id);
  return ids;
}

TemplateRegistry TemplateRegistry::with_builtins(const std::string& prefix, const Contract& contract,
                                                 const std::optional<std::filesystem::path>& dir) {
  TemplateRegistry reg;
  for (const auto& [id, body] : detail::builtin_template_table()) {
    if (id.rfind(prefix, 0) == 0) reg.add(util::TextTemplate(id, body), contract);
  }
  if (dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(*dir)) {
      if (e.is_regular_file() && e.path().extension() == ".txt" &&
          e.path().stem().string().rfind(prefix, 0) == 0) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) reg.add(util::TextTemplate::load(f), contract);
  }
  return reg;
}

void TemplateRegistry::add(util::TextTemplate t, const Contract& contract) {
  const auto problems = t.lint(contract.required, contract.optional);
  if (!problems.empty()) {
    std::string msg = "template '" + t.id() + "' is invalid:";
    for (const auto& p : problems) msg += " " + p + ";";
    fail(ErrorCode::unknown_template, msg);
  }
  const std::string id = t.id();
  templates_.insert_or_assign(id, std::move(t));
}

const util::TextTemplate& TemplateRegistry::get(const std::string& id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) fail(ErrorCode::unknown_template, "no template '" + id + "'");
  return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, t] : templates_) out.push_back(id);
  return out;
}

}  // namespace stancegen
