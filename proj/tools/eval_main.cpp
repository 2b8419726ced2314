// SPDX-License-Identifier: Apache-2.0
// eval: score generated responses and render metric tables.
#include <iostream>

#include "cli_common.hpp"
#include "stancegen/eval/metrics.hpp"
#include "stancegen/eval/report.hpp"
#include "stancegen/util/jsonl.hpp"

using namespace stancegen;
using nlohmann::json;

namespace {

json score_row(const eval::EvalItem& it, const eval::ItemScores& s) {
  return {{"item_id", it.item_id},      {"predicted", to_string(s.predicted)},
          {"stance_match", s.stance_match},
          {"log_likelihood", static_cast<double>(s.log_likelihood)},
          {"tokens", s.tokens},         {"perplexity", s.perplexity},
          {"relevance", s.relevance},   {"cmss", s.cmss}};
}

eval::ItemScores scores_from(const json& j) {
  eval::ItemScores s;
  s.predicted = parse_stance(j.at("predicted").get<std::string>());
  s.stance_match = j.at("stance_match").get<bool>();
  s.log_likelihood = j.value("log_likelihood", 0.0);
  s.tokens = j.value("tokens", std::size_t{0});
  s.perplexity = j.at("perplexity").get<double>();
  s.relevance = j.at("relevance").get<double>();
  s.cmss = j.at("cmss").get<double>();
  return s;
}

void write_report(const std::filesystem::path& dir, const std::string& stem, const eval::MetricReport& r,
                  const eval::RenderOptions& o) {
  util::write_json(dir / (stem + ".json"), eval::to_json(r));
  util::write_text(dir / (stem + ".txt"), eval::render_text(r, o));
  util::write_text(dir / (stem + ".csv"), eval::render_csv(r, o));
  std::cout << eval::render_text(r, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controllability, perplexity, relevance and CMSS"};
  app.require_subcommand(1);

  std::string items_file, backends_file, out, group_by = "none", image_root;
  bool clamp = false;
  auto* run = app.add_subcommand("run", "Score items and write the report");
  run->add_option("--items", items_file, "EvalItem JSONL")->required()->check(CLI::ExistingFile);
  run->add_option("--backends", backends_file, "Backend config JSON")->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--image-root", image_root, "Directory image paths are relative to");
  run->add_option("--group-by", group_by, "none | target")->check(CLI::IsMember({"none", "target"}));
  run->add_flag("--clamp-cosine", clamp, "Display CMSS and relevance clamped to [0, 1]");

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Re-render the report from a finished run");
  report->add_option("--run", run_dir, "Directory written by 'eval run'")->required()->check(CLI::ExistingDirectory);
  report->add_option("--group-by", group_by, "none | target")->check(CLI::IsMember({"none", "target"}));
  report->add_flag("--clamp-cosine", clamp, "Display CMSS and relevance clamped to [0, 1]");

  return tools::run_app(app, argc, argv, [&]() -> int {
    const eval::RenderOptions opts{clamp};
    const bool by_target = group_by == "target";
    if (*run) {
      const auto items = eval::load_eval_items(items_file);
      const json cfg = backends_file.empty() ? json::object() : util::read_json(backends_file);
      const auto base = backends_file.empty() ? std::filesystem::path{}
                                              : std::filesystem::absolute(backends_file).parent_path();
      const auto backends = eval::make_backends(cfg, base);
      auto resolved = items;
      if (!image_root.empty()) {
        for (auto& it : resolved) it.image_path = (std::filesystem::path(image_root) / it.image_path).string();
      }
      const auto scores = eval::score_items(resolved, backends);
      std::filesystem::create_directories(out);
      std::vector<json> item_rows, rows;
      for (std::size_t i = 0; i < items.size(); ++i) {
        item_rows.push_back(eval::to_json(items[i]));
        rows.push_back(score_row(items[i], scores[i]));
      }
      util::write_jsonl(std::filesystem::path(out) / "items.jsonl", item_rows);
      util::write_jsonl(std::filesystem::path(out) / "scores.jsonl", rows);
      write_report(out, "report", eval::build_report(items, scores, by_target), opts);
    } else if (*report) {
      const auto items = eval::load_eval_items(std::filesystem::path(run_dir) / "items.jsonl");
      std::vector<eval::ItemScores> scores;
      util::for_each_jsonl(std::filesystem::path(run_dir) / "scores.jsonl",
                           [&](const json& j, std::size_t) { scores.push_back(scores_from(j)); });
      write_report(run_dir, by_target ? "report_by_target" : "report", eval::build_report(items, scores, by_target), opts);
    }
    return 0;
  });
}
