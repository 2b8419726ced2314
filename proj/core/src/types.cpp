// SPDX-License-Identifier: Apache-2.0
#include "stancegen/types.hpp"

#include <string>

#include "stancegen/error.hpp"

namespace stancegen {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::array<E, N>& values) {
  for (E v : values) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
E parse_or_throw(std::string_view s, const std::array<E, N>& values, const char* what) {
  if (auto v = lookup(s, values)) return *v;
  fail(ErrorCode::schema_error, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<Author, 3> all_authors{Author::harris, Author::trump, Author::other};
constexpr std::array<MediaKind, 3> all_media_kinds{MediaKind::image, MediaKind::video,
                                                   MediaKind::gif};

}  // namespace

std::string_view to_string(Author v) {
  switch (v) {
    case Author::harris: return "HARRIS";
    case Author::trump: return "TRUMP";
    case Author::other: return "OTHER";
  }
  return "OTHER";
}

std::string_view to_string(MediaKind v) {
  switch (v) {
    case MediaKind::image: return "IMAGE";
    case MediaKind::video: return "VIDEO";
    case MediaKind::gif: return "GIF";
  }
  return "IMAGE";
}

std::string_view to_string(Stance v) { return v == Stance::favor ? "FAVOR" : "AGAINST"; }

std::string_view to_string(Topic v) {
  switch (v) {
    case Topic::calls_for_voter_support: return "CALLS_FOR_VOTER_SUPPORT";
    case Topic::sharing_political_ideologies: return "SHARING_POLITICAL_IDEOLOGIES";
    case Topic::self_promotion: return "SELF_PROMOTION";
    case Topic::reporting_achievements: return "REPORTING_ACHIEVEMENTS";
    case Topic::other: return "OTHER";
  }
  return "OTHER";
}

std::string_view to_string(Style v) {
  switch (v) {
    case Style::sarcasm: return "SARCASM";
    case Style::direct_expression: return "DIRECT_EXPRESSION";
    case Style::examples: return "EXAMPLES";
    case Style::questions_counterquestions: return "QUESTIONS_COUNTERQUESTIONS";
    case Style::humor_irony: return "HUMOR_IRONY";
    case Style::other: return "OTHER";
  }
  return "OTHER";
}

Author parse_author(std::string_view s) { return parse_or_throw(s, all_authors, "author"); }
MediaKind parse_media_kind(std::string_view s) {
  return parse_or_throw(s, all_media_kinds, "media kind");
}
Stance parse_stance(std::string_view s) { return parse_or_throw(s, all_stances, "stance"); }
Topic parse_topic(std::string_view s) { return parse_or_throw(s, all_topics, "topic"); }
Style parse_style(std::string_view s) { return parse_or_throw(s, all_styles, "style"); }

std::optional<Stance> try_parse_stance(std::string_view s) { return lookup(s, all_stances); }
std::optional<Topic> try_parse_topic(std::string_view s) { return lookup(s, all_topics); }
std::optional<Style> try_parse_style(std::string_view s) { return lookup(s, all_styles); }

std::optional<std::string> target_tag(Author a) {
  switch (a) {
    case Author::harris: return "H";
    case Author::trump: return "T";
    case Author::other: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace stancegen
