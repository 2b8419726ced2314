// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace stancegen {

enum class Author { harris, trump, other };
enum class MediaKind { image, video, gif };
enum class Stance { favor, against };

enum class Topic {
  calls_for_voter_support,
  sharing_political_ideologies,
  self_promotion,
  reporting_achievements,
  other,
};

enum class Style {
  sarcasm,
  direct_expression,
  examples,
  questions_counterquestions,
  humor_irony,
  other,
};

inline constexpr std::array<Stance, 2> all_stances{Stance::favor, Stance::against};
inline constexpr std::array<Topic, 5> all_topics{
    Topic::calls_for_voter_support, Topic::sharing_political_ideologies,
    Topic::self_promotion, Topic::reporting_achievements, Topic::other};
inline constexpr std::array<Style, 6> all_styles{
    Style::sarcasm,       Style::direct_expression, Style::examples,
    Style::questions_counterquestions, Style::humor_irony, Style::other};

// Wire names are the upper-case enum spellings (FAVOR, SELF_PROMOTION, ...).
std::string_view to_string(Author v);
std::string_view to_string(MediaKind v);
std::string_view to_string(Stance v);
std::string_view to_string(Topic v);
std::string_view to_string(Style v);

// Parsers throw Error{schema_error} on unknown names.
Author parse_author(std::string_view s);
MediaKind parse_media_kind(std::string_view s);
Stance parse_stance(std::string_view s);
Topic parse_topic(std::string_view s);
Style parse_style(std::string_view s);

std::optional<Stance> try_parse_stance(std::string_view s);
std::optional<Topic> try_parse_topic(std::string_view s);
std::optional<Style> try_parse_style(std::string_view s);

/// Report target column for an author: "H", "T", or nullopt for OTHER.
std::optional<std::string> target_tag(Author a);

}  // namespace stancegen
