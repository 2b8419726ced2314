// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stancegen/util/text_template.hpp"

namespace stancegen {

/// Prompt templates compiled into the library from core/templates/.
std::optional<std::string> builtin_template(const std::string& id);
std::vector<std::string> builtin_template_ids();

/// Versioned templates by id. Directory entries (*.txt, id = file stem)
/// shadow the built-ins. Every template is linted against its contract when
/// it is added; violations raise UnknownTemplate.
class TemplateRegistry {
 public:
  struct Contract {
    std::set<std::string> required;
    std::set<std::string> optional;
  };

  TemplateRegistry() = default;
  /// Built-ins plus any files in `dir` (when given), linted with `contract`.
  static TemplateRegistry with_builtins(const std::string& prefix, const Contract& contract,
                                        const std::optional<std::filesystem::path>& dir = {});

  void add(util::TextTemplate t, const Contract& contract);
  const util::TextTemplate& get(const std::string& id) const;
  bool contains(const std::string& id) const { return templates_.count(id) != 0; }
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, util::TextTemplate> templates_;
};

}  // namespace stancegen
