// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace stancegen::util {

/// Calls fn(record, line_number) for each nonblank line. Malformed JSON raises
/// Error{schema_error} naming the file and line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

nlohmann::json read_json(const std::filesystem::path& path);

/// Writes pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace stancegen::util
