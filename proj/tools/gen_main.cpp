// SPDX-License-Identifier: Apache-2.0
// gen: dataset split, fine-tune config, instruction datasets, generation runs.
#include <iostream>
#include <memory>

#include "cli_common.hpp"
#include "stancegen/chat.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/generation/generation.hpp"
#include "stancegen/util/jsonl.hpp"

using namespace stancegen;
using nlohmann::json;

namespace {

void write_samples(const std::filesystem::path& path, const std::vector<corpus::Sample>& samples) {
  std::vector<json> rows;
  for (const auto& s : samples) rows.push_back(corpus::to_json(s));
  util::write_jsonl(path, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction data, splits, fine-tune configuration, and generation"};
  app.require_subcommand(1);

  std::string corpus_dir, out;
  double ratio = 0.8;
  std::uint64_t seed = 7;
  auto* split = app.add_subcommand("split", "Group-by-post train/test split");
  split->add_option("--corpus", corpus_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  split->add_option("--ratio", ratio, "Train fraction of posts")->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", seed, "Shuffle seed");
  split->add_option("--out", out, "Output directory (train.jsonl, test.jsonl)")->required();

  std::vector<std::string> sets;
  std::string lr, batch, seq;
  auto* emit = app.add_subcommand("emit-config", "Write the fine-tuning configuration");
  emit->add_option("--lr", lr, "Learning rate");
  emit->add_option("--batch-size", batch, "Batch size");
  emit->add_option("--max-seq-len", seq, "Maximum sequence length");
  emit->add_option("--set", sets, "Any field as key=value");
  emit->add_option("--out", out, "Output file (stdout when omitted)");

  std::string template_dir, template_id = generation::default_instruction_template;
  auto* instr = app.add_subcommand("instructions", "Instruction dataset for labeled samples");
  instr->add_option("--samples", corpus_dir, "Samples JSONL")->required()->check(CLI::ExistingFile);
  instr->add_option("--templates", template_dir, "Extra template directory");
  instr->add_option("--template", template_id, "Template id");
  instr->add_option("--out", out, "Output JSONL")->required();

  std::string backend = "echo", requests, base_url, model, key_env;
  std::size_t in_flight = 4;
  auto* run = app.add_subcommand("run", "Generate responses for a request file");
  run->add_option("--backend", backend, "echo | toy-prefix | http")->check(CLI::IsMember({"echo", "toy-prefix", "http"}));
  run->add_option("--requests", requests, "GenerationRequest JSONL")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Response JSONL")->required();
  run->add_option("--max-in-flight", in_flight, "Concurrent requests")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "toy-prefix seed");
  run->add_option("--base-url", base_url, "http backend URL");
  run->add_option("--model", model, "http backend model");
  run->add_option("--api-key-env", key_env, "Environment variable holding the API key");

  return tools::run_app(app, argc, argv, [&]() -> int {
    if (*split) {
      const auto c = corpus::read_corpus(corpus_dir);
      const auto r = generation::split_dataset(c.samples, ratio, seed);
      std::filesystem::create_directories(out);
      write_samples(std::filesystem::path(out) / "train.jsonl", r.train);
      write_samples(std::filesystem::path(out) / "test.jsonl", r.test);
      std::cout << "train " << r.train.size() << " (" << r.train_posts << " posts)\n"
                << "test " << r.test.size() << " (" << r.test_posts << " posts)\n";
    } else if (*emit) {
      auto overrides = tools::key_values(sets);
      if (!lr.empty()) overrides["learning_rate"] = lr;
      if (!batch.empty()) overrides["batch_size"] = batch;
      if (!seq.empty()) overrides["max_seq_len"] = seq;
      const auto cfg = generation::apply_overrides({}, overrides);
      if (out.empty()) {
        std::cout << generation::to_json(cfg).dump(2) << "\n";
      } else {
        generation::write_finetune_config(out, cfg);
      }
    } else if (*instr) {
      std::vector<corpus::Sample> samples;
      util::for_each_jsonl(corpus_dir, [&](const json& j, std::size_t) { samples.push_back(corpus::sample_from_json(j)); });
      const auto reg = generation::instruction_templates(
          template_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(template_dir));
      std::vector<json> rows;
      for (const auto& r : generation::build_instruction_dataset(samples, reg, template_id)) {
        rows.push_back(generation::to_json(r));
      }
      util::write_jsonl(out, rows);
      std::cout << "records " << rows.size() << "\n";
    } else if (*run) {
      std::vector<generation::GenerationRequest> reqs;
      util::for_each_jsonl(requests, [&](const json& j, std::size_t) { reqs.push_back(generation::request_from_json(j)); });
      std::unique_ptr<generation::Generator> gen;
      if (backend == "echo") {
        gen = std::make_unique<generation::EchoGenerator>();
      } else if (backend == "toy-prefix") {
        gen = std::make_unique<generation::ToyPrefixGenerator>(seed);
      } else {
        if (base_url.empty() || model.empty()) fail(ErrorCode::invalid_argument, "http backend needs --base-url and --model");
        gen = std::make_unique<generation::ChatGenerator>(
            "http", std::make_shared<HttpChatBackend>(HttpChatBackend::Config{base_url, model, key_env}));
      }
      const auto responses = generation::generate_batch(reqs, *gen, in_flight);
      std::vector<json> rows;
      for (const auto& r : responses) rows.push_back(generation::to_json(r));
      util::write_jsonl(out, rows);
      std::cout << "responses " << rows.size() << "\n";
    }
    return 0;
  });
}
