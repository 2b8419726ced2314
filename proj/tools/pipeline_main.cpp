// SPDX-License-Identifier: Apache-2.0
// pipeline: build a cleaned, expanded corpus and report its statistics.
#include <iostream>
#include <memory>
#include <optional>

#include "cli_common.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/corpus/language.hpp"
#include "stancegen/corpus/stats.hpp"
#include "stancegen/corpus/text_clean.hpp"

using namespace stancegen;

int main(int argc, char** argv) {
  CLI::App app{"Corpus construction: cleaning, filtering, media expansion, statistics"};
  app.require_subcommand(1);

  std::string posts, comments, out_dir, frame_cmd, win_start, win_end;
  std::size_t min_words = 10, max_words = 128;
  double lang_threshold = corpus::default_language_threshold;
  bool no_post_length = false;
  auto* build = app.add_subcommand("build", "Build samples.jsonl and rejects.jsonl");
  build->add_option("--posts", posts, "Posts JSONL")->required()->check(CLI::ExistingFile);
  build->add_option("--comments", comments, "Comments JSONL")->required()->check(CLI::ExistingFile);
  build->add_option("--out", out_dir, "Output directory")->required();
  build->add_option("--min-words", min_words, "Inclusive lower word bound");
  build->add_option("--max-words", max_words, "Inclusive upper word bound");
  build->add_option("--lang-threshold", lang_threshold, "English confidence threshold");
  build->add_flag("--no-post-length-filter", no_post_length, "Apply the word bounds to comments only");
  build->add_option("--window-start", win_start, "YYYY-MM-DDTHH:MM:SSZ");
  build->add_option("--window-end", win_end, "YYYY-MM-DDTHH:MM:SSZ (inclusive)");
  build->add_option("--frame-command", frame_cmd, "First-frame extractor, e.g. 'ffmpeg -y -i {in} -frames:v 1 {out}'");

  std::string corpus_dir;
  bool check_reference = false;
  auto* stats = app.add_subcommand("stats", "Per-author counts and stance proportions");
  stats->add_option("--corpus", corpus_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  stats->add_flag("--check-reference", check_reference, "Compare against the published per-author rows");

  std::string text;
  auto* clean = app.add_subcommand("clean", "Clean text from --text or stdin lines");
  clean->add_option("--text", text, "Text to clean");

  return tools::run_app(app, argc, argv, [&]() -> int {
    if (*build) {
      corpus::LexicalLanguageDetector detector;
      std::unique_ptr<corpus::CommandFrameExtractor> frames;
      if (!frame_cmd.empty()) {
        frames = std::make_unique<corpus::CommandFrameExtractor>(frame_cmd, std::filesystem::path(out_dir) / "frames");
      }
      corpus::BuildConfig cfg;
      cfg.bounds = {min_words, max_words};
      cfg.lang_threshold = lang_threshold;
      cfg.length_filter_posts = !no_post_length;
      cfg.detector = &detector;
      cfg.frame_extractor = frames.get();
      if (!win_start.empty() || !win_end.empty()) {
        if (win_start.empty() || win_end.empty()) fail(ErrorCode::invalid_argument, "give both window bounds");
        cfg.window = corpus::CollectionWindow{corpus::parse_timestamp(win_start), corpus::parse_timestamp(win_end)};
      }
      const auto c = corpus::build_corpus(corpus::load_posts(posts), corpus::load_comments(comments), cfg);
      corpus::write_corpus(c, out_dir);
      std::cout << "samples " << c.samples.size() << "\nrejects " << c.rejects.size() << "\n";
    } else if (*stats) {
      const auto report = corpus::corpus_stats(corpus::read_corpus(corpus_dir));
      std::cout << corpus::to_json(report).dump(2) << "\n";
      if (check_reference) {
        const auto diffs = corpus::validate_against_reference(report, corpus::published_reference_rows());
        for (const auto& d : diffs) std::cout << "mismatch: " << d << "\n";
        return diffs.empty() ? 0 : 1;
      }
    } else if (*clean) {
      if (!text.empty()) {
        std::cout << corpus::clean_text(text) << "\n";
      } else {
        std::string line;
        while (std::getline(std::cin, line)) std::cout << corpus::clean_text(line) << "\n";
      }
    }
    return 0;
  });
}
