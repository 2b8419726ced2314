// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "stancegen/annotation/queue.hpp"
#include "stancegen/error.hpp"

namespace stancegen::annotation {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceOptions {
  bool show_model_labels = true;
  std::size_t default_page_size = 10;
  std::size_t max_page_size = 100;
  /// Served under /media/ when set.
  std::optional<std::filesystem::path> media_root;
  /// Supplies AnnotationRecord timestamps; defaults to the wall clock.
  std::function<std::string()> clock;
};

/// Transport-independent handlers for the adjudication HTTP API:
///
///   GET  /queue?state=NEEDS_THIRD&page=1&page_size=10
///   GET  /entry/{sample_id}?annotator_id=...
///   POST /entry/{sample_id}/label   {annotator_id, stance, topic, style}
///   GET  /agreement
///
/// Errors are {code, message} bodies with 400/404/409/422 statuses.
/// GET /entry hides prior human labels unless annotator_id has already
/// labeled that entry.
class AnnotationApi {
 public:
  AnnotationApi(AnnotationQueue& queue, ServiceOptions options = {});

  ApiResponse get_queue(const std::map<std::string, std::string>& query) const;
  ApiResponse get_entry(const std::string& sample_id,
                        const std::map<std::string, std::string>& query) const;
  ApiResponse post_label(const std::string& sample_id, const std::string& body);
  ApiResponse get_agreement() const;

  /// Routes a request by method and path.
  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query, const std::string& body);

  const ServiceOptions& options() const { return options_; }

 private:
  AnnotationQueue& queue_;
  ServiceOptions options_;
};

/// Maps an error code to its HTTP status.
int http_status(ErrorCode code);

/// Binds AnnotationApi to an HTTP listener.
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationApi& api);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace stancegen::annotation
