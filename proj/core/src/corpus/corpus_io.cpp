// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <filesystem>

#include "stancegen/corpus/corpus.hpp"
#include "stancegen/error.hpp"
#include "stancegen/util/jsonl.hpp"

namespace stancegen::corpus {

using nlohmann::json;

namespace {

std::string require_string(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    fail(ErrorCode::schema_error, std::string(what) + ": missing string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) {
    fail(ErrorCode::schema_error, std::string("field '") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

std::vector<MediaRef> media_list(const json& j) {
  std::vector<MediaRef> out;
  if (!j.contains("media") || j["media"].is_null()) return out;
  if (!j["media"].is_array()) fail(ErrorCode::schema_error, "'media' must be an array");
  for (const auto& m : j["media"]) out.push_back(media_from_json(m));
  return out;
}

json media_json(const std::vector<MediaRef>& media) {
  json arr = json::array();
  for (const auto& m : media) arr.push_back(to_json(m));
  return arr;
}

}  // namespace

Timestamp parse_timestamp(const std::string& s) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi, &sec, &tail) !=
          7 ||
      tail != 'Z') {
    fail(ErrorCode::schema_error, "bad timestamp '" + s + "' (want YYYY-MM-DDTHH:MM:SSZ)");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) {
    fail(ErrorCode::schema_error, "bad timestamp '" + s + "'");
  }
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{sec};
}

std::string format_timestamp(Timestamp t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{t - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

MediaRef media_from_json(const json& j) {
  MediaRef m;
  m.kind = parse_media_kind(require_string(j, "kind", "media"));
  m.uri = require_string(j, "uri", "media");
  m.first_frame_uri = optional_string(j, "first_frame_uri");
  return m;
}

json to_json(const MediaRef& m) {
  json j{{"kind", to_string(m.kind)}, {"uri", m.uri}};
  if (m.first_frame_uri) j["first_frame_uri"] = *m.first_frame_uri;
  return j;
}

Post post_from_json(const json& j) {
  Post p;
  p.id = require_string(j, "id", "post");
  p.author = parse_author(require_string(j, "author", "post"));
  p.text = require_string(j, "text", "post");
  p.media = media_list(j);
  p.created_at = parse_timestamp(require_string(j, "created_at", "post"));
  if (auto t = optional_string(j, "topic")) p.topic = parse_topic(*t);
  return p;
}

json to_json(const Post& p) {
  json j{{"id", p.id},
         {"author", to_string(p.author)},
         {"text", p.text},
         {"media", media_json(p.media)},
         {"created_at", format_timestamp(p.created_at)}};
  if (p.topic) j["topic"] = to_string(*p.topic);
  return j;
}

Comment comment_from_json(const json& j) {
  Comment c;
  c.id = require_string(j, "id", "comment");
  c.parent_post_id = require_string(j, "parent_post_id", "comment");
  c.text = require_string(j, "text", "comment");
  c.media = media_list(j);
  if (auto s = optional_string(j, "stance")) c.stance = parse_stance(*s);
  if (auto s = optional_string(j, "style")) c.style = parse_style(*s);
  return c;
}

json to_json(const Comment& c) {
  json j{{"id", c.id},
         {"parent_post_id", c.parent_post_id},
         {"text", c.text},
         {"media", media_json(c.media)}};
  if (c.stance) j["stance"] = to_string(*c.stance);
  if (c.style) j["style"] = to_string(*c.style);
  return j;
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.sample_id = require_string(j, "sample_id", "sample");
  s.post_id = require_string(j, "post_id", "sample");
  s.author = parse_author(require_string(j, "author", "sample"));
  s.post_text = require_string(j, "post_text", "sample");
  if (!j.contains("image")) fail(ErrorCode::schema_error, "sample: missing 'image'");
  s.image = media_from_json(j["image"]);
  s.image_source = parse_media_kind(require_string(j, "image_source", "sample"));
  if (!j.contains("comment")) fail(ErrorCode::schema_error, "sample: missing 'comment'");
  s.comment = comment_from_json(j["comment"]);
  if (auto v = optional_string(j, "stance")) s.stance = parse_stance(*v);
  if (auto v = optional_string(j, "topic")) s.topic = parse_topic(*v);
  return s;
}

json to_json(const Sample& s) {
  json j{{"sample_id", s.sample_id},
         {"post_id", s.post_id},
         {"author", to_string(s.author)},
         {"post_text", s.post_text},
         {"image", to_json(s.image)},
         {"image_source", to_string(s.image_source)},
         {"comment", to_json(s.comment)}};
  j["stance"] = s.stance ? json(to_string(*s.stance)) : json(nullptr);
  j["topic"] = s.topic ? json(to_string(*s.topic)) : json(nullptr);
  return j;
}

json to_json(const Reject& r) {
  return json{{"record_kind", r.record_kind},
              {"id", r.id},
              {"reason", to_string(r.reason)},
              {"detail", r.detail}};
}

namespace {

RejectReason parse_reject_reason(const std::string& s) {
  for (auto r : {RejectReason::empty_text, RejectReason::not_english, RejectReason::too_short,
                 RejectReason::too_long, RejectReason::outside_window,
                 RejectReason::no_usable_media, RejectReason::media_skipped,
                 RejectReason::parent_rejected}) {
    if (to_string(r) == s) return r;
  }
  fail(ErrorCode::schema_error, "unknown reject reason " + s);
}

template <typename T, typename Parse>
std::vector<T> load_records(const std::filesystem::path& path, Parse parse) {
  std::vector<T> out;
  util::for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      out.push_back(parse(j));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::schema_error) throw;
      fail(ErrorCode::schema_error,
           path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace

std::vector<Post> load_posts(const std::filesystem::path& path) {
  return load_records<Post>(path, post_from_json);
}

std::vector<Comment> load_comments(const std::filesystem::path& path) {
  return load_records<Comment>(path, comment_from_json);
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<json> samples;
  samples.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) samples.push_back(to_json(s));
  util::write_jsonl(dir / "samples.jsonl", samples);
  std::vector<json> rejects;
  rejects.reserve(corpus.rejects.size());
  for (const auto& r : corpus.rejects) rejects.push_back(to_json(r));
  util::write_jsonl(dir / "rejects.jsonl", rejects);
}

Corpus read_corpus(const std::filesystem::path& dir) {
  Corpus c;
  c.samples = load_records<Sample>(dir / "samples.jsonl", sample_from_json);
  if (std::filesystem::exists(dir / "rejects.jsonl")) {
    util::for_each_jsonl(dir / "rejects.jsonl", [&](const json& j, std::size_t) {
      c.rejects.push_back({j.at("record_kind").get<std::string>(), j.at("id").get<std::string>(),
                           parse_reject_reason(j.at("reason").get<std::string>()),
                           j.value("detail", std::string{})});
    });
  }
  return c;
}

}  // namespace stancegen::corpus
