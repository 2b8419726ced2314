// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <algorithm>
#include <atomic>

#include "stancegen/util/jsonl.hpp"

namespace testing_support {

using namespace stancegen;

std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(STANCEGEN_TEST_DATA) / rel;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

sdmg::MatD random_matrix(std::mt19937_64& rng, long rows, long cols, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  sdmg::MatD m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

sdmg::VecD random_vector(std::mt19937_64& rng, long n, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  sdmg::VecD v(n);
  for (long i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

oracle::Matrix to_rows(const sdmg::MatD& m) {
  oracle::Matrix r(static_cast<std::size_t>(m.rows()), oracle::Vector(static_cast<std::size_t>(m.cols())));
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) r[i][j] = m(i, j);
  return r;
}

oracle::Vector to_std(const sdmg::VecD& v) { return {v.data(), v.data() + v.size()}; }

namespace {

eval::MetricValues values_from(const nlohmann::json& a) {
  eval::MetricValues v;
  v.controllability = a.at(0).get<double>();
  v.cmss = a.at(1).get<double>();
  v.relevance = a.at(2).get<double>();
  v.perplexity = a.at(3).get<double>();
  v.perplexity_token_weighted = v.perplexity;
  return v;
}

}  // namespace

eval::MetricReport load_published_table(const std::string& rel) {
  const auto j = util::read_json(data_path(rel));
  eval::MetricReport r;
  r.targets = j.at("targets").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) {
    eval::ReportRow out;
    out.modality = *eval::try_parse_modality(row.at("modality").get<std::string>());
    out.model = row.at("model").get<std::string>();
    if (r.targets.empty()) {
      out.cells[""] = values_from(row.at("values"));
    } else {
      for (const auto& t : r.targets) out.cells[t] = values_from(row.at(t));
    }
    r.rows.push_back(out);
  }
  return r;
}

corpus::Sample make_sample(const std::string& sample_id, const std::string& post_id, Author author,
                           Stance stance) {
  corpus::Sample s;
  s.sample_id = sample_id;
  s.post_id = post_id;
  s.author = author;
  s.post_text = "post " + post_id + " about the election and the future of the country";
  s.image = {MediaKind::image, "media/" + post_id + ".jpg", std::nullopt};
  s.comment.id = "c-" + sample_id;
  s.comment.parent_post_id = post_id;
  s.comment.text = "comment " + sample_id + " with enough words to pass every length filter";
  s.comment.stance = stance;
  s.stance = stance;
  s.topic = Topic::other;
  return s;
}

corpus::Corpus synthetic_corpus(const std::vector<SyntheticRow>& rows) {
  corpus::Corpus c;
  for (const auto& row : rows) {
    const std::string prefix(to_string(row.author));
    const std::size_t total = row.favor + row.against;
    for (std::size_t i = 0; i < total; ++i) {
      const std::string post = prefix + "-p" + std::to_string(i % row.posts);
      c.samples.push_back(make_sample(prefix + "-s" + std::to_string(i), post, row.author,
                                      i < row.favor ? Stance::favor : Stance::against));
    }
  }
  return c;
}

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string("word");
  return s;
}

std::string fuzz_string(std::mt19937_64& rng) {
  static const std::vector<std::string> atoms = {
      "a", "Z", "_", "1", " ", "  ", "\t", "\n", "@", "@x", "@user_1", "http://", "https://t.co/",
      "www.", "www", ".", "..", "!", "?", ",", "'", "\"", ":", "/", "//", "&", "&amp;", "&lt;",
      "&gt;", "&quot;", "&#39;", "&apos;", "amp;", "#", "*", "~", "<", ">", "=", "[", "]", "{",
      "}", "|", "\\", "`", "^", "•", "·", "😂", "🇺🇸", "é", " ", "　", "\x01", "\x7f",
      "\xc2\x85", "\xff", "\xe2\x80", "ſ", "K", "http:/", "ttp://", "h"};
  std::uniform_int_distribution<std::size_t> len(0, 30), pick(0, atoms.size() - 1);
  std::string s;
  for (std::size_t i = len(rng); i > 0; --i) s += atoms[pick(rng)];
  return s;
}

std::vector<corpus::Sample> fuzz_corpus(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> posts(1, 60), per(1, 5);
  std::vector<corpus::Sample> out;
  const int g = posts(rng);
  for (int p = 0; p < g; ++p) {
    for (int k = per(rng); k > 0; --k) {
      out.push_back(make_sample("p" + std::to_string(p) + "c" + std::to_string(k), "p" + std::to_string(p),
                                Author::trump, k % 2 ? Stance::favor : Stance::against));
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace testing_support
