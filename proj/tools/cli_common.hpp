// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "stancegen/error.hpp"

namespace stancegen::tools {

inline constexpr int exit_usage = 64;
inline constexpr int exit_failure = 2;

/// Parses argv, runs the selected callback, and turns exceptions into exit codes.
template <class Fn>
int run_app(CLI::App& app, int argc, char** argv, Fn&& body) {
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_usage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_default_logger(spdlog::default_logger());
  try {
    return body();
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return exit_failure;
}

/// "key=value" strings to a map.
inline std::map<std::string, std::string> key_values(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& kv : items) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::invalid_argument, "expected key=value, got '" + kv + "'");
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

}  // namespace stancegen::tools
