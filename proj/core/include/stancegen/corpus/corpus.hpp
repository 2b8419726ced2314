// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/corpus/language.hpp"
#include "stancegen/corpus/text_clean.hpp"
#include "stancegen/types.hpp"

namespace stancegen::corpus {

using Timestamp = std::chrono::sys_seconds;

struct MediaRef {
  MediaKind kind = MediaKind::image;
  std::string uri;
  std::optional<std::string> first_frame_uri;

  bool operator==(const MediaRef&) const = default;
};

struct Post {
  std::string id;
  Author author = Author::other;
  std::string text;
  std::vector<MediaRef> media;
  Timestamp created_at{};
  std::optional<Topic> topic;
};

struct Comment {
  std::string id;
  std::string parent_post_id;
  std::string text;
  std::vector<MediaRef> media;
  std::optional<Stance> stance;
  std::optional<Style> style;
};

/// One (comment, post image) pair. `image` is always IMAGE kind; for videos
/// and GIFs it points at the extracted first frame and `image_source` keeps the
/// original kind.
struct Sample {
  std::string sample_id;
  std::string post_id;
  Author author = Author::other;
  std::string post_text;
  MediaRef image;
  MediaKind image_source = MediaKind::image;
  Comment comment;
  std::optional<Stance> stance;
  std::optional<Topic> topic;
};

/// Expansion output before a comment is attached.
struct SampleStub {
  std::string post_id;
  std::string post_text;
  MediaRef image;
  MediaKind image_source = MediaKind::image;
  std::size_t image_index = 0;
};

enum class RejectReason {
  empty_text,
  not_english,
  too_short,
  too_long,
  outside_window,
  no_usable_media,
  media_skipped,
  parent_rejected,
};

std::string_view to_string(RejectReason r);

struct Reject {
  std::string record_kind;  // "post", "comment" or "media"
  std::string id;
  RejectReason reason = RejectReason::empty_text;
  std::string detail;
};

struct Corpus {
  std::vector<Sample> samples;
  std::vector<Reject> rejects;
};

/// Supplies first frames for VIDEO/GIF media that arrive without one.
class FrameExtractor {
 public:
  virtual ~FrameExtractor() = default;
  virtual std::optional<std::string> first_frame(const MediaRef& media) const = 0;
};

/// Runs an external tool, e.g. "ffmpeg -y -loglevel error -i {in} -frames:v 1 {out}".
/// {in} and {out} are substituted (shell-quoted); the output path is
/// <output_dir>/<basename(uri)>.frame0.jpg. Success requires exit status 0
/// and the output file to exist.
class CommandFrameExtractor final : public FrameExtractor {
 public:
  CommandFrameExtractor(std::string command_template, std::filesystem::path output_dir);
  std::optional<std::string> first_frame(const MediaRef& media) const override;

 private:
  std::string command_template_;
  std::filesystem::path output_dir_;
};

struct ExpandResult {
  std::vector<SampleStub> stubs;
  std::vector<Reject> skipped;  // media items that could not yield an image
};

/// One stub per IMAGE item plus one per VIDEO/GIF item with a first frame
/// (recorded or supplied by `extractor`). Throws Error{no_usable_media} when
/// nothing usable remains.
ExpandResult expand_post(const Post& post, const FrameExtractor* extractor = nullptr);

struct CollectionWindow {
  Timestamp start;
  Timestamp end;  // inclusive
};

struct BuildConfig {
  LengthBounds bounds;
  double lang_threshold = default_language_threshold;
  bool length_filter_posts = true;
  bool length_filter_comments = true;
  std::optional<CollectionWindow> window;
  const LanguageDetector* detector = nullptr;
  const FrameExtractor* frame_extractor = nullptr;
};

/// clean -> language -> length -> expand, for posts and then comments.
/// Comments whose parent was rejected are rejected with parent_rejected. A
/// comment naming a post absent from the input raises Error{schema_error}.
Corpus build_corpus(const std::vector<Post>& posts, const std::vector<Comment>& comments,
                    const BuildConfig& config);

// --- serialization -------------------------------------------------------

Timestamp parse_timestamp(const std::string& iso8601);  // "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp t);

MediaRef media_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MediaRef& m);
Post post_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Post& p);
Comment comment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Comment& c);
Sample sample_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Sample& s);
nlohmann::json to_json(const Reject& r);

std::vector<Post> load_posts(const std::filesystem::path& path);
std::vector<Comment> load_comments(const std::filesystem::path& path);

/// Writes samples.jsonl and rejects.jsonl into dir (created if needed).
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);
/// Reads samples.jsonl (and rejects.jsonl when present).
Corpus read_corpus(const std::filesystem::path& dir);

}  // namespace stancegen::corpus
