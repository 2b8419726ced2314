// SPDX-License-Identifier: Apache-2.0
#include "stancegen/util/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "stancegen/error.hpp"

namespace stancegen::util {

using nlohmann::json;

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::schema_error,
           path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    fn(record, line_no);
  }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> out;
  for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(j); });
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << '\n';
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::schema_error, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& value) {
  write_text(path, value.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
}

}  // namespace stancegen::util
