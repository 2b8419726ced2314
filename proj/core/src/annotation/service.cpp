// SPDX-License-Identifier: Apache-2.0
#include "stancegen/annotation/service.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>

#include <httplib.h>

#include "stancegen/annotation/kappa.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/error.hpp"

namespace stancegen::annotation {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::duplicate_annotator:
    case ErrorCode::entry_already_resolved:
    case ErrorCode::wrong_state:
    case ErrorCode::annotator_not_independent:
      return 409;
    case ErrorCode::no_dual_annotations: return 422;
    default: return 400;
  }
}

namespace {

ApiResponse error_response(ErrorCode code, const std::string& message) {
  return {http_status(code), json{{"code", to_string(code)}, {"message", message}}};
}

std::size_t parse_positive(const std::map<std::string, std::string>& query, const char* key,
                           std::size_t fallback) {
  const auto it = query.find(key);
  if (it == query.end()) return fallback;
  std::size_t v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
    fail(ErrorCode::invalid_argument, std::string(key) + " must be a positive integer");
  }
  return v;
}

std::string wall_clock() {
  return corpus::format_timestamp(
      std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

json entry_view(const QueueEntry& e, const std::optional<std::string>& viewer,
                bool show_model_labels) {
  const bool viewer_labeled =
      viewer && std::any_of(e.human_labels.begin(), e.human_labels.end(),
                            [&](const AnnotationRecord& r) { return r.annotator_id == *viewer; });
  json humans = json::array();
  for (const auto& h : e.human_labels) {
    humans.push_back(viewer_labeled ? to_json(h) : json{{"masked", true}});
  }
  json models = json::array();
  if (show_model_labels) {
    for (const auto& m : e.model_labels) models.push_back(to_json(m));
  }
  json j{{"sample_id", e.sample_id},
         {"post_text", e.context.post_text},
         {"image", e.context.image_uri},
         {"comment_text", e.context.comment_text},
         {"state", to_string(e.state)},
         {"model_labels", models},
         {"human_labels", humans},
         {"human_label_count", e.human_labels.size()},
         {"labels_visible", viewer_labeled}};
  // The final label reveals the verdicts, so it is blinded the same way.
  j["final_label"] =
      (e.final_label && viewer_labeled) ? to_json(*e.final_label) : json(nullptr);
  return j;
}

}  // namespace

AnnotationApi::AnnotationApi(AnnotationQueue& queue, ServiceOptions options)
    : queue_(queue), options_(std::move(options)) {
  if (!options_.clock) options_.clock = wall_clock;
}

ApiResponse AnnotationApi::get_queue(const std::map<std::string, std::string>& query) const {
  try {
    std::optional<QueueState> state;
    if (const auto it = query.find("state"); it != query.end() && !it->second.empty()) {
      state = try_parse_queue_state(it->second);
      if (!state) fail(ErrorCode::invalid_argument, "unknown state " + it->second);
    }
    const std::size_t page = parse_positive(query, "page", 1);
    const std::size_t page_size =
        std::min(parse_positive(query, "page_size", options_.default_page_size),
                 options_.max_page_size);
    const auto entries = queue_.entries(state);
    const std::size_t total = entries.size();
    const std::size_t pages = (total + page_size - 1) / page_size;
    json items = json::array();
    const std::size_t begin = (page - 1) * page_size;
    for (std::size_t i = begin; i < std::min(total, begin + page_size); ++i) {
      const auto& e = entries[i];
      items.push_back(json{{"sample_id", e.sample_id},
                           {"state", to_string(e.state)},
                           {"post_text", e.context.post_text},
                           {"image", e.context.image_uri},
                           {"human_label_count", e.human_labels.size()}});
    }
    return {200, json{{"entries", items},
                      {"page", page},
                      {"page_size", page_size},
                      {"total", total},
                      {"pages", pages}}};
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  }
}

ApiResponse AnnotationApi::get_entry(const std::string& sample_id,
                                     const std::map<std::string, std::string>& query) const {
  const auto e = queue_.entry(sample_id);
  if (!e) return error_response(ErrorCode::not_found, "no queue entry " + sample_id);
  std::optional<std::string> viewer;
  if (const auto it = query.find("annotator_id"); it != query.end() && !it->second.empty()) {
    viewer = it->second;
  }
  return {200, entry_view(*e, viewer, options_.show_model_labels)};
}

ApiResponse AnnotationApi::post_label(const std::string& sample_id, const std::string& body) {
  try {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::invalid_argument, std::string("malformed JSON body: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::invalid_argument, "body must be a JSON object");
    auto str = [&](const char* key) -> std::string {
      if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
        fail(ErrorCode::invalid_argument, std::string("missing field '") + key + "'");
      }
      return j[key].get<std::string>();
    };
    AnnotationRecord r;
    r.sample_id = sample_id;
    r.annotator_id = str("annotator_id");
    const auto stance = try_parse_stance(str("stance"));
    if (!stance) fail(ErrorCode::invalid_argument, "stance must be FAVOR or AGAINST");
    r.stance = *stance;
    const auto topic = try_parse_topic(str("topic"));
    if (!topic) fail(ErrorCode::invalid_argument, "unknown topic");
    r.topic = *topic;
    if (j.contains("style") && !j["style"].is_null()) {
      const auto style = j["style"].is_string()
                             ? try_parse_style(j["style"].get<std::string>())
                             : std::nullopt;
      if (!style) fail(ErrorCode::invalid_argument, "unknown style");
      r.style = *style;
    }
    r.timestamp = options_.clock();
    if (!queue_.entry(sample_id)) fail(ErrorCode::not_found, "no queue entry " + sample_id);
    const QueueEntry updated = queue_.submit(r);
    return {200, entry_view(updated, r.annotator_id, options_.show_model_labels)};
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  }
}

ApiResponse AnnotationApi::get_agreement() const {
  try {
    return {200, to_json(compute_agreement_report(queue_.human_records()))};
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  }
}

ApiResponse AnnotationApi::handle(const std::string& method, const std::string& path,
                                  const std::map<std::string, std::string>& query,
                                  const std::string& body) {
  static const std::string entry_prefix = "/entry/";
  static const std::string label_suffix = "/label";
  if (method == "GET" && path == "/queue") return get_queue(query);
  if (method == "GET" && path == "/agreement") return get_agreement();
  if (path.rfind(entry_prefix, 0) == 0) {
    std::string rest = path.substr(entry_prefix.size());
    if (method == "POST" && rest.size() > label_suffix.size() &&
        rest.compare(rest.size() - label_suffix.size(), label_suffix.size(), label_suffix) == 0) {
      return post_label(rest.substr(0, rest.size() - label_suffix.size()), body);
    }
    if (method == "GET" && !rest.empty()) return get_entry(rest, query);
  }
  return error_response(ErrorCode::not_found, method + " " + path);
}

// --- HTTP binding -------------------------------------------------------------

struct AnnotationServer::Impl {
  explicit Impl(AnnotationApi& a) : api(a) {}
  AnnotationApi& api;
  httplib::Server server;
};

AnnotationServer::AnnotationServer(AnnotationApi& api)
    : impl_(std::make_unique<Impl>(api)) {
  auto& srv = impl_->server;
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const std::string path = httplib::detail::decode_url(req.path, false);
    const ApiResponse r = impl_->api.handle(req.method, path, query, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  srv.Get(R"(/queue)", forward);
  srv.Get(R"(/agreement)", forward);
  srv.Get(R"(/entry/.+)", forward);
  srv.Post(R"(/entry/.+/label)", forward);
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  if (api.options().media_root) {
    srv.set_mount_point("/media", api.options().media_root->string());
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) fail(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void AnnotationServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail(ErrorCode::io_error, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace stancegen::annotation
