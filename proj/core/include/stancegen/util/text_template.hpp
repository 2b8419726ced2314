// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace stancegen::util {

/// A text file with {slot} placeholders. Slot names are [a-z_]+; any other
/// brace content is literal text.
class TextTemplate {
 public:
  TextTemplate() = default;
  TextTemplate(std::string id, std::string body);

  static TextTemplate load(const std::filesystem::path& path);

  const std::string& id() const { return id_; }
  const std::string& body() const { return body_; }

  /// Slot name -> number of occurrences.
  const std::map<std::string, std::size_t>& slots() const { return slots_; }

  /// Problems with respect to the given slot contract: required slots that
  /// are missing or repeated, and slots outside required + optional.
  std::vector<std::string> lint(const std::set<std::string>& required,
                                const std::set<std::string>& optional = {}) const;

  /// Substitutes every slot; slots absent from values render as empty.
  std::string render(const std::map<std::string, std::string>& values) const;

 private:
  std::string id_;
  std::string body_;
  std::map<std::string, std::size_t> slots_;
};

}  // namespace stancegen::util
