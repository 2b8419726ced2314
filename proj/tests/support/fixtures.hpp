// SPDX-License-Identifier: Apache-2.0
// Shared test data helpers.
#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/eval/report.hpp"
#include "stancegen/sdmg/tensor.hpp"

namespace testing_support {

std::filesystem::path data_path(const std::string& rel);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "stancegen");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

stancegen::sdmg::MatD random_matrix(std::mt19937_64& rng, long rows, long cols, double scale = 1.0);
stancegen::sdmg::VecD random_vector(std::mt19937_64& rng, long n, double scale = 1.0);
oracle::Matrix to_rows(const stancegen::sdmg::MatD& m);
oracle::Vector to_std(const stancegen::sdmg::VecD& v);

/// Published results table loaded into a report (values only, items = 0).
stancegen::eval::MetricReport load_published_table(const std::string& rel);

/// Labeled sample with a distinct post per call unless `post_id` is given.
stancegen::corpus::Sample make_sample(const std::string& sample_id, const std::string& post_id,
                                      stancegen::Author author, stancegen::Stance stance);

/// A corpus whose per-author rows are given as (posts, favor, against); every
/// post carries one image and the comments are spread over the posts.
struct SyntheticRow {
  stancegen::Author author;
  std::size_t posts;
  std::size_t favor;
  std::size_t against;
};
stancegen::corpus::Corpus synthetic_corpus(const std::vector<SyntheticRow>& rows);

/// n copies of "word" joined by single spaces.
std::string words(std::size_t n);

/// Random mix of URL, mention, entity, punctuation, whitespace and odd UTF-8 atoms.
std::string fuzz_string(std::mt19937_64& rng);

/// 1-60 posts with 1-5 labeled samples each, shuffled.
std::vector<stancegen::corpus::Sample> fuzz_corpus(std::mt19937_64& rng);

}  // namespace testing_support
