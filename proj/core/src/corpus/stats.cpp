// SPDX-License-Identifier: Apache-2.0
#include "stancegen/corpus/stats.hpp"

#include <set>
#include <utility>

#include "stancegen/error.hpp"

namespace stancegen::corpus {

using nlohmann::json;

StatsReport corpus_stats(const Corpus& corpus) {
  StatsReport report;
  std::map<Author, std::set<std::string>> posts;
  std::map<Author, std::set<std::pair<std::string, std::string>>> post_images;
  std::map<std::string, const Comment*> comments;

  for (const Sample& s : corpus.samples) {
    if (!s.stance) {
      fail(ErrorCode::unlabeled_samples, "sample " + s.sample_id + " has no stance label");
    }
    AuthorStats& a = report.by_author[s.author];
    ++a.samples;
    if (*s.stance == Stance::favor) {
      ++a.favor;
    } else {
      ++a.against;
    }
    posts[s.author].insert(s.post_id);
    if (s.image_source == MediaKind::image) post_images[s.author].insert({s.post_id, s.image.uri});
    comments.emplace(s.comment.id, &s.comment);
  }

  for (auto& [author, a] : report.by_author) {
    a.posts = posts[author].size();
    a.post_images = post_images[author].size();
    a.favor_proportion = static_cast<double>(a.favor) / static_cast<double>(a.samples);
    a.against_proportion = static_cast<double>(a.against) / static_cast<double>(a.samples);
  }
  report.samples = corpus.samples.size();
  report.comments = comments.size();

  if (!comments.empty()) {
    std::map<std::string, std::size_t> styles;
    std::size_t with_images = 0;
    std::size_t with_videos = 0;
    for (const auto& [id, c] : comments) {
      ++styles[c->style ? std::string(to_string(*c->style)) : "UNSPECIFIED"];
      bool img = false;
      bool vid = false;
      for (const MediaRef& m : c->media) {
        img = img || m.kind == MediaKind::image;
        vid = vid || m.kind != MediaKind::image;
      }
      with_images += img ? 1 : 0;
      with_videos += vid ? 1 : 0;
    }
    const auto n = static_cast<double>(comments.size());
    for (const auto& [name, count] : styles) {
      report.style_distribution[name] = static_cast<double>(count) / n;
    }
    report.comments_with_images = static_cast<double>(with_images) / n;
    report.comments_with_videos = static_cast<double>(with_videos) / n;
  }
  return report;
}

json to_json(const StatsReport& report) {
  json authors = json::object();
  for (const auto& [author, a] : report.by_author) {
    authors[std::string(to_string(author))] = json{{"posts", a.posts},
                                                   {"post_images", a.post_images},
                                                   {"favor", a.favor},
                                                   {"against", a.against},
                                                   {"samples", a.samples},
                                                   {"favor_proportion", a.favor_proportion},
                                                   {"against_proportion", a.against_proportion}};
  }
  return json{{"by_author", authors},
              {"samples", report.samples},
              {"comments", report.comments},
              {"style_distribution", report.style_distribution},
              {"media", json{{"comments_with_images", report.comments_with_images},
                             {"comments_with_videos", report.comments_with_videos}}}};
}

const std::vector<ReferenceRow>& published_reference_rows() {
  static const std::vector<ReferenceRow> rows{
      {Author::harris, 837, 199, 1596, 10529, 12126},
      {Author::trump, 202, 156, 5269, 7630, 12899},
  };
  return rows;
}

std::vector<std::string> validate_against_reference(const StatsReport& report,
                                                    const std::vector<ReferenceRow>& rows) {
  std::vector<std::string> issues;
  auto check = [&](Author author, const char* field, std::size_t got, std::size_t want) {
    if (got != want) {
      issues.push_back(std::string(to_string(author)) + "." + field + ": corpus " +
                       std::to_string(got) + ", reference " + std::to_string(want));
    }
  };
  for (const ReferenceRow& row : rows) {
    if (row.favor + row.against != row.samples) {
      issues.push_back(std::string(to_string(row.author)) +
                       ": reference favor + against = " + std::to_string(row.favor + row.against) +
                       " but samples = " + std::to_string(row.samples));
    }
    const auto it = report.by_author.find(row.author);
    const AuthorStats a = it == report.by_author.end() ? AuthorStats{} : it->second;
    check(row.author, "posts", a.posts, row.posts);
    check(row.author, "post_images", a.post_images, row.post_images);
    check(row.author, "favor", a.favor, row.favor);
    check(row.author, "against", a.against, row.against);
    check(row.author, "samples", a.samples, row.samples);
  }
  return issues;
}

}  // namespace stancegen::corpus
