// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/corpus/corpus.hpp"

namespace stancegen::corpus {

struct AuthorStats {
  std::size_t posts = 0;
  std::size_t post_images = 0;  // distinct IMAGE-kind post media in use
  std::size_t favor = 0;
  std::size_t against = 0;
  std::size_t samples = 0;
  double favor_proportion = 0.0;
  double against_proportion = 0.0;
};

struct StatsReport {
  std::map<Author, AuthorStats> by_author;
  std::size_t samples = 0;
  std::size_t comments = 0;  // distinct comments behind the samples
  /// Over distinct comments; includes "UNSPECIFIED" for comments with no style
  /// so the values form a partition.
  std::map<std::string, double> style_distribution;
  double comments_with_images = 0.0;
  double comments_with_videos = 0.0;  // VIDEO or GIF
};

/// Exact counts over a fully labeled corpus. Throws Error{unlabeled_samples}
/// if any sample has no stance.
StatsReport corpus_stats(const Corpus& corpus);

nlohmann::json to_json(const StatsReport& report);

/// A published per-author row to compare a built corpus against.
struct ReferenceRow {
  Author author;
  std::size_t posts;
  std::size_t post_images;
  std::size_t favor;
  std::size_t against;
  std::size_t samples;
};

/// Published dataset rows: Harris and Trump.
const std::vector<ReferenceRow>& published_reference_rows();

/// Lists every field that differs from the reference, plus any row whose own
/// favor + against does not equal its samples. Empty means consistent.
std::vector<std::string> validate_against_reference(const StatsReport& report,
                                                    const std::vector<ReferenceRow>& rows);

}  // namespace stancegen::corpus
