// SPDX-License-Identifier: Apache-2.0
#include "stancegen/corpus/corpus.hpp"

#include <cstdlib>
#include <unordered_map>
#include <unordered_set>

#include "stancegen/error.hpp"

namespace stancegen::corpus {

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::empty_text: return "EMPTY_TEXT";
    case RejectReason::not_english: return "NOT_ENGLISH";
    case RejectReason::too_short: return "TOO_SHORT";
    case RejectReason::too_long: return "TOO_LONG";
    case RejectReason::outside_window: return "OUTSIDE_WINDOW";
    case RejectReason::no_usable_media: return "NO_USABLE_MEDIA";
    case RejectReason::media_skipped: return "MEDIA_SKIPPED";
    case RejectReason::parent_rejected: return "PARENT_REJECTED";
  }
  return "UNKNOWN";
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

// Shared text gate for posts and comments. Returns the cleaned text, or the
// reason it was rejected.
struct TextVerdict {
  std::string cleaned;
  std::optional<RejectReason> reject;
  std::string detail;
};

TextVerdict check_text(const std::string& raw, bool apply_length, const BuildConfig& config) {
  TextVerdict v;
  v.cleaned = clean_text(raw);
  if (v.cleaned.empty()) {
    v.reject = RejectReason::empty_text;
    return v;
  }
  if (!is_english(v.cleaned, config.detector, config.lang_threshold)) {
    const auto guess = config.detector->detect(v.cleaned);
    v.reject = RejectReason::not_english;
    v.detail = guess.language + " " + std::to_string(guess.confidence);
    return v;
  }
  if (apply_length) {
    const std::size_t w = word_count(v.cleaned);
    if (w < config.bounds.min_words) {
      v.reject = RejectReason::too_short;
      v.detail = std::to_string(w) + " words";
    } else if (w > config.bounds.max_words) {
      v.reject = RejectReason::too_long;
      v.detail = std::to_string(w) + " words";
    }
  }
  return v;
}

}  // namespace

CommandFrameExtractor::CommandFrameExtractor(std::string command_template,
                                             std::filesystem::path output_dir)
    : command_template_(std::move(command_template)), output_dir_(std::move(output_dir)) {}

std::optional<std::string> CommandFrameExtractor::first_frame(const MediaRef& media) const {
  std::error_code ec;
  std::filesystem::create_directories(output_dir_, ec);
  const auto out =
      output_dir_ / (std::filesystem::path(media.uri).filename().string() + ".frame0.jpg");
  std::string cmd = command_template_;
  replace_all(cmd, "{in}", shell_quote(media.uri));
  replace_all(cmd, "{out}", shell_quote(out.string()));
  if (std::system(cmd.c_str()) != 0) return std::nullopt;
  if (!std::filesystem::exists(out)) return std::nullopt;
  return out.string();
}

ExpandResult expand_post(const Post& post, const FrameExtractor* extractor) {
  ExpandResult result;
  for (std::size_t i = 0; i < post.media.size(); ++i) {
    const MediaRef& m = post.media[i];
    const std::string media_id = post.id + "/media/" + std::to_string(i);
    if (m.kind == MediaKind::image) {
      if (m.uri.empty()) {
        result.skipped.push_back({"media", media_id, RejectReason::media_skipped, "empty uri"});
        continue;
      }
      result.stubs.push_back({post.id, post.text, m, MediaKind::image, result.stubs.size()});
      continue;
    }
    std::optional<std::string> frame = m.first_frame_uri;
    if ((!frame || frame->empty()) && extractor != nullptr) frame = extractor->first_frame(m);
    if (!frame || frame->empty()) {
      result.skipped.push_back({"media", media_id, RejectReason::media_skipped,
                                std::string(to_string(m.kind)) + " without first frame"});
      continue;
    }
    MediaRef image{MediaKind::image, *frame, std::nullopt};
    result.stubs.push_back({post.id, post.text, image, m.kind, result.stubs.size()});
  }
  if (result.stubs.empty()) {
    fail(ErrorCode::no_usable_media, "post " + post.id + " has no usable image or first frame");
  }
  return result;
}

Corpus build_corpus(const std::vector<Post>& posts, const std::vector<Comment>& comments,
                    const BuildConfig& config) {
  Corpus corpus;

  std::unordered_set<std::string> post_ids;
  for (const Post& p : posts) {
    if (p.id.empty()) fail(ErrorCode::schema_error, "post with empty id");
    if (!post_ids.insert(p.id).second) fail(ErrorCode::schema_error, "duplicate post id " + p.id);
  }
  std::unordered_set<std::string> comment_ids;
  for (const Comment& c : comments) {
    if (c.id.empty()) fail(ErrorCode::schema_error, "comment with empty id");
    if (!comment_ids.insert(c.id).second) {
      fail(ErrorCode::schema_error, "duplicate comment id " + c.id);
    }
    if (!post_ids.contains(c.parent_post_id)) {
      fail(ErrorCode::schema_error,
           "comment " + c.id + " references missing post " + c.parent_post_id);
    }
  }
  if (posts.empty()) return corpus;

  struct AcceptedPost {
    const Post* post;
    std::vector<SampleStub> stubs;
  };
  std::unordered_map<std::string, AcceptedPost> accepted;

  for (const Post& p : posts) {
    if (config.window && (p.created_at < config.window->start || p.created_at > config.window->end)) {
      corpus.rejects.push_back(
          {"post", p.id, RejectReason::outside_window, format_timestamp(p.created_at)});
      continue;
    }
    TextVerdict v = check_text(p.text, config.length_filter_posts, config);
    if (v.reject) {
      corpus.rejects.push_back({"post", p.id, *v.reject, v.detail});
      continue;
    }
    Post cleaned = p;
    cleaned.text = v.cleaned;
    try {
      ExpandResult ex = expand_post(cleaned, config.frame_extractor);
      for (auto& s : ex.skipped) corpus.rejects.push_back(std::move(s));
      accepted.emplace(p.id, AcceptedPost{&p, std::move(ex.stubs)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_usable_media) throw;
      corpus.rejects.push_back({"post", p.id, RejectReason::no_usable_media, e.what()});
    }
  }

  for (const Comment& c : comments) {
    const auto parent = accepted.find(c.parent_post_id);
    if (parent == accepted.end()) {
      corpus.rejects.push_back({"comment", c.id, RejectReason::parent_rejected, c.parent_post_id});
      continue;
    }
    TextVerdict v = check_text(c.text, config.length_filter_comments, config);
    if (v.reject) {
      corpus.rejects.push_back({"comment", c.id, *v.reject, v.detail});
      continue;
    }
    Comment cleaned = c;
    cleaned.text = v.cleaned;
    const Post& post = *parent->second.post;
    for (const SampleStub& stub : parent->second.stubs) {
      Sample s;
      s.sample_id = c.id + "#" + std::to_string(stub.image_index);
      s.post_id = post.id;
      s.author = post.author;
      s.post_text = stub.post_text;
      s.image = stub.image;
      s.image_source = stub.image_source;
      s.comment = cleaned;
      s.stance = c.stance;
      s.topic = post.topic;
      corpus.samples.push_back(std::move(s));
    }
  }
  return corpus;
}

}  // namespace stancegen::corpus
