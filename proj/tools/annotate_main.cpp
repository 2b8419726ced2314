// SPDX-License-Identifier: Apache-2.0
// annotate: coarse machine labeling, agreement statistics, adjudication service.
#include <csignal>
#include <iostream>
#include <memory>

#include "cli_common.hpp"
#include "stancegen/annotation/kappa.hpp"
#include "stancegen/annotation/labelers.hpp"
#include "stancegen/annotation/queue.hpp"
#include "stancegen/annotation/service.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/util/jsonl.hpp"

using namespace stancegen;
using nlohmann::json;

namespace {

annotation::AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse labeling, Cohen's kappa, and the adjudication HTTP service"};
  app.require_subcommand(1);

  std::string corpus_dir, out_file, gate = "unanimity", events;
  std::vector<std::string> labeler_specs;
  auto* coarse = app.add_subcommand("coarse", "Label samples with scripted labelers and gate them");
  coarse->add_option("--corpus", corpus_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  coarse->add_option("--labeler", labeler_specs, "id=replies.json (at least two)")->required();
  coarse->add_option("--gate", gate, "unanimity | majority")->check(CLI::IsMember({"unanimity", "majority"}));
  coarse->add_option("--out", out_file, "Output JSONL")->required();
  coarse->add_option("--events", events, "Append flagged samples to this queue event log");

  std::string records;
  std::vector<long long> table;
  auto* kappa = app.add_subcommand("kappa", "Agreement from annotation records or a 2x2 table");
  kappa->add_option("--records", records, "AnnotationRecord JSONL")->check(CLI::ExistingFile);
  kappa->add_option("--table", table, "Row-major 2x2 contingency counts")->expected(4)->delimiter(',');

  std::string host = "127.0.0.1";
  int port = 8080;
  bool hide_model_labels = false;
  std::string media_root;
  auto* serve = app.add_subcommand("serve", "Serve GET /queue, GET /entry/{id}, POST /entry/{id}/label, GET /agreement");
  serve->add_option("--events", events, "Queue event log (created if absent)")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--media-root", media_root, "Directory served under /media");
  serve->add_flag("--hide-model-labels", hide_model_labels, "Do not show machine labels to annotators");

  return tools::run_app(app, argc, argv, [&]() -> int {
    if (*coarse) {
      const auto c = corpus::read_corpus(corpus_dir);
      std::vector<std::unique_ptr<annotation::LabelerClient>> owned;
      std::vector<annotation::LabelerClient*> labelers;
      for (const auto& [id, path] : tools::key_values(labeler_specs)) {
        owned.push_back(std::make_unique<annotation::ScriptedLabeler>(
            id, util::read_json(path).get<std::map<std::string, std::string>>()));
        labelers.push_back(owned.back().get());
      }
      std::optional<annotation::AnnotationQueue> queue;
      if (!events.empty()) queue.emplace(std::filesystem::path(events));
      const auto mode = gate == "majority" ? annotation::GateMode::majority : annotation::GateMode::unanimity;
      std::vector<json> rows;
      std::size_t flagged = 0;
      for (const auto& s : c.samples) {
        const auto r = annotation::request_model_labels(s, labelers);
        json labels = json::array();
        for (const auto& l : r.labels) labels.push_back(annotation::to_json(l));
        annotation::ConsensusResult cr;
        cr.sample_id = s.sample_id;
        if (r.labels.size() >= 2) cr = annotation::aggregate_coarse(r.labels, mode);
        if (cr.status == annotation::ConsensusStatus::flagged) {
          ++flagged;
          if (queue) queue->enqueue(s.sample_id, {s.post_text, s.image.uri, s.comment.text}, r.labels);
        }
        rows.push_back({{"sample_id", s.sample_id}, {"labels", labels}, {"consensus", annotation::to_json(cr)}});
      }
      util::write_jsonl(out_file, rows);
      std::cout << "samples " << rows.size() << "\nflagged " << flagged << "\n";
    } else if (*kappa) {
      if (!table.empty()) {
        for (const long long v : table) {
          if (v < 0) fail(ErrorCode::invalid_argument, "counts must be nonnegative");
        }
        auto u = [&](int i) { return static_cast<std::size_t>(table[static_cast<std::size_t>(i)]); };
        annotation::ContingencyTable t{{{u(0), u(1)}, {u(2), u(3)}}};
        std::cout << annotation::cohen_kappa(t) << "\n";
      } else if (!records.empty()) {
        std::vector<annotation::AnnotationRecord> recs;
        util::for_each_jsonl(records, [&](const json& j, std::size_t) {
          recs.push_back(annotation::annotation_record_from_json(j));
        });
        std::cout << annotation::to_json(annotation::compute_agreement_report(recs)).dump(2) << "\n";
      } else {
        fail(ErrorCode::invalid_argument, "give --records or --table");
      }
    } else if (*serve) {
      annotation::AnnotationQueue queue{std::filesystem::path(events)};
      annotation::ServiceOptions opts;
      opts.show_model_labels = !hide_model_labels;
      if (!media_root.empty()) opts.media_root = media_root;
      annotation::AnnotationApi api(queue, opts);
      annotation::AnnotationServer server(api);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("annotation service on {}:{} ({} entries)", host, port, queue.entries().size());
      server.run(host, port);
    }
    return 0;
  });
}
