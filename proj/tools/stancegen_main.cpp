// SPDX-License-Identifier: Apache-2.0
// stancegen: end-to-end runs, replay, and the annotation service.
#include <csignal>
#include <iostream>

#include "cli_common.hpp"
#include "stancegen/annotation/queue.hpp"
#include "stancegen/annotation/service.hpp"
#include "stancegen/run/run.hpp"
#include "stancegen/util/jsonl.hpp"

using namespace stancegen;

namespace {

annotation::AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stance-driven multimodal generation toolkit"};
  app.set_version_flag("--version", "stancegen " + run::version());
  app.require_subcommand(1);

  std::string config;
  auto* run_cmd = app.add_subcommand("run", "Run every stage from one config file");
  run_cmd->add_option("--config", config, "Run config JSON")->required();
  std::string run_out;
  run_cmd->add_option("--out", run_out, "Output directory (overrides paths.output)");

  std::string manifest, out;
  auto* replay_cmd = app.add_subcommand("replay", "Rerun a manifest and compare artifact hashes");
  replay_cmd->add_option("--manifest", manifest, "manifest.json of a finished run")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", out, "Output directory for the rerun")->required();

  std::string events, host = "127.0.0.1", media_root;
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Start the annotation HTTP service");
  serve->add_option("--port", port, "Port (default: service.port from --config, else 8080)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--config", config, "Run config; serves <output>/annotation/events.jsonl");
  serve->add_option("--events", events, "Queue event log to serve");
  serve->add_option("--media-root", media_root, "Directory served under /media");

  return tools::run_app(app, argc, argv, [&]() -> int {
    if (*run_cmd) {
      auto cfg = run::load_run_config(config);
      if (!run_out.empty()) cfg.output = std::filesystem::absolute(run_out);
      const auto m = run::run_end_to_end(cfg);
      const auto out_dir = cfg.resolve(cfg.output);
      for (const auto& s : m.stages) std::cout << s.name << " " << s.summary.dump() << "\n";
      std::cout << "manifest " << (out_dir / "manifest.json").string() << "\n";
    } else if (*replay_cmd) {
      const auto r = run::replay(run::manifest_from_json(util::read_json(manifest)), out);
      for (const auto& m : r.mismatches) std::cout << "mismatch " << m << "\n";
      std::cout << (r.identical ? "replay identical" : "replay differs") << "\n";
      return r.identical ? 0 : 1;
    } else if (*serve) {
      if (!config.empty()) {
        const auto cfg = run::load_run_config(config);
        if (events.empty()) events = (cfg.resolve(cfg.output) / "annotation" / "events.jsonl").string();
        if (media_root.empty()) media_root = cfg.resolve(cfg.media_root).string();
        if (port < 0) port = cfg.service_port;
      }
      if (events.empty()) fail(ErrorCode::invalid_argument, "give --events or --config");
      if (port < 0) port = 8080;
      annotation::AnnotationQueue queue{std::filesystem::path(events)};
      annotation::ServiceOptions opts;
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
