// SPDX-License-Identifier: Apache-2.0
#include "stancegen/run/run.hpp"

#include <functional>
#include <memory>

#include <spdlog/spdlog.h>

#include "stancegen/annotation/kappa.hpp"
#include "stancegen/annotation/labelers.hpp"
#include "stancegen/annotation/queue.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/corpus/language.hpp"
#include "stancegen/corpus/stats.hpp"
#include "stancegen/eval/metrics.hpp"
#include "stancegen/eval/report.hpp"
#include "stancegen/generation/generation.hpp"
#include "stancegen/sdmg/encoder.hpp"
#include "stancegen/sdmg/fusion.hpp"
#include "stancegen/templates.hpp"
#include "stancegen/util/hash.hpp"
#include "stancegen/util/jsonl.hpp"

namespace stancegen::run {

using nlohmann::json;
namespace fs = std::filesystem;

std::map<std::string, std::string> RunManifest::artifacts() const {
  std::map<std::string, std::string> all;
  for (const auto& s : stages) all.insert(s.artifacts.begin(), s.artifacts.end());
  return all;
}

json to_json(const RunManifest& m) {
  json stages = json::array();
  for (const auto& s : m.stages) {
    stages.push_back({{"name", s.name}, {"artifacts", s.artifacts}, {"summary", s.summary}});
  }
  return {{"run_name", m.run_name}, {"version", m.version}, {"config", m.config},
          {"config_dir", m.config_dir}, {"seeds", m.seeds}, {"inputs", m.inputs},
          {"stages", stages}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.run_name = j.at("run_name").get<std::string>();
    m.version = j.value("version", "");
    m.config = j.at("config");
    m.config_dir = j.value("config_dir", "");
    m.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    for (const auto& s : j.at("stages")) {
      m.stages.push_back({s.at("name").get<std::string>(),
                          s.at("artifacts").get<std::map<std::string, std::string>>(),
                          s.value("summary", json::object())});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_error, std::string("run manifest: ") + e.what());
  }
  return m;
}

std::vector<std::string> compare_artifacts(const std::map<std::string, std::string>& expected,
                                           const std::map<std::string, std::string>& actual) {
  std::vector<std::string> out;
  for (const auto& [path, hash] : expected) {
    const auto it = actual.find(path);
    if (it == actual.end()) {
      out.push_back(path + ": missing");
    } else if (it->second != hash) {
      out.push_back(path + ": expected " + hash + " got " + it->second);
    }
  }
  for (const auto& [path, hash] : actual) {
    if (!expected.count(path)) out.push_back(path + ": unexpected artifact");
  }
  return out;
}

namespace {

const std::vector<std::string> stage_dirs{"corpus", "annotation", "split", "sdmg", "generation", "eval"};

class Stage {
 public:
  Stage(std::string name, const fs::path& root) : root_(root) { record_.name = std::move(name); }

  fs::path path(const std::string& rel) const { return root_ / rel; }

  void add(const std::string& rel) { record_.artifacts[rel] = util::sha256_file(root_ / rel); }

  void write_jsonl(const std::string& rel, const std::vector<json>& rows) {
    util::write_jsonl(path(rel), rows);
    add(rel);
  }
  void write_json(const std::string& rel, const json& value) {
    util::write_json(path(rel), value);
    add(rel);
  }
  void write_text(const std::string& rel, const std::string& text) {
    util::write_text(path(rel), text);
    add(rel);
  }

  StageRecord& record() { return record_; }

 private:
  fs::path root_;
  StageRecord record_;
};

template <class Fn>
auto in_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const std::exception& e) {
    throw StageError(name, Error(ErrorCode::io_error, e.what()));
  }
}

std::map<std::string, std::string> read_reply_table(const fs::path& path) {
  const json j = util::read_json(path);
  try {
    return j.get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_error, path.string() + ": " + e.what());
  }
}

std::vector<json> rows_of(const std::vector<corpus::Sample>& samples) {
  std::vector<json> rows;
  for (const auto& s : samples) rows.push_back(corpus::to_json(s));
  return rows;
}

}  // namespace

RunManifest run_end_to_end(const RunConfig& config) {
  validate(config);
  const fs::path out = config.resolve(config.output);
  fs::create_directories(out);
  for (const auto& d : stage_dirs) fs::remove_all(out / d);
  for (const auto& d : stage_dirs) fs::create_directories(out / d);
  fs::remove(out / "manifest.json");

  RunManifest manifest;
  manifest.run_name = config.run_name;
  manifest.version = version();
  manifest.config = config.source;
  manifest.config_dir = config.base_dir.string();
  manifest.seeds = {{"split", config.split_seed},
                    {"sdmg", config.sdmg_seed},
                    {"generation", config.generation_seed}};
  manifest.inputs["posts"] = util::sha256_file(config.resolve(config.posts));
  manifest.inputs["comments"] = util::sha256_file(config.resolve(config.comments));
  if (config.human_labels) manifest.inputs["human_labels"] = util::sha256_file(config.resolve(*config.human_labels));
  for (const auto& l : config.labelers) {
    if (l.type == "scripted") manifest.inputs["labeler:" + l.id] = util::sha256_file(config.resolve(l.path));
  }
  const fs::path media_root = config.resolve(config.media_root);

  // --- corpus -------------------------------------------------------------
  corpus::Corpus built = in_stage("corpus", [&] {
    Stage st("corpus", out);
    const auto posts = corpus::load_posts(config.resolve(config.posts));
    const auto comments = corpus::load_comments(config.resolve(config.comments));
    corpus::LexicalLanguageDetector detector;
    std::unique_ptr<corpus::CommandFrameExtractor> frames;
    if (config.frame_command) {
      frames = std::make_unique<corpus::CommandFrameExtractor>(*config.frame_command, out / "corpus" / "frames");
    }
    corpus::BuildConfig bc;
    bc.bounds = {config.min_words, config.max_words};
    bc.lang_threshold = config.lang_threshold;
    bc.length_filter_posts = config.length_filter_posts;
    bc.detector = &detector;
    bc.frame_extractor = frames.get();
    if (config.window_start) {
      bc.window = corpus::CollectionWindow{corpus::parse_timestamp(*config.window_start),
                                           corpus::parse_timestamp(*config.window_end)};
    }
    corpus::Corpus c = corpus::build_corpus(posts, comments, bc);
    corpus::write_corpus(c, out / "corpus");
    st.add("corpus/samples.jsonl");
    st.add("corpus/rejects.jsonl");
    st.record().summary = {{"posts", posts.size()}, {"comments", comments.size()},
                           {"samples", c.samples.size()}, {"rejects", c.rejects.size()}};
    manifest.stages.push_back(st.record());
    return c;
  });

  // --- coarse annotation + human calibration --------------------------------
  std::vector<corpus::Sample> labeled = in_stage("annotation", [&] {
    Stage st("annotation", out);
    std::vector<std::unique_ptr<annotation::LabelerClient>> owned;
    const auto prompts = TemplateRegistry::with_builtins(
        "coarse_label_", {annotation::coarse_prompt_required_slots, annotation::coarse_prompt_optional_slots},
        config.templates ? std::optional<fs::path>(config.resolve(*config.templates)) : std::nullopt);
    for (const auto& l : config.labelers) {
      if (l.type == "scripted") {
        owned.push_back(std::make_unique<annotation::ScriptedLabeler>(l.id, read_reply_table(config.resolve(l.path))));
      } else {
        auto backend = std::make_shared<HttpChatBackend>(HttpChatBackend::Config{l.base_url, l.model, l.api_key_env});
        owned.push_back(std::make_unique<annotation::ChatLabelerClient>(l.id, backend, prompts.get(config.labeler_template)));
      }
    }
    std::vector<annotation::LabelerClient*> labelers;
    for (auto& o : owned) labelers.push_back(o.get());
    const auto gate = config.gate == "majority" ? annotation::GateMode::majority : annotation::GateMode::unanimity;

    annotation::AnnotationQueue queue(out / "annotation" / "events.jsonl");
    std::map<std::string, annotation::ConsensusResult> consensus;
    std::vector<json> model_rows;
    for (const auto& s : built.samples) {
      const auto result = annotation::request_model_labels(s, labelers);
      json labels = json::array(), failures = json::array();
      for (const auto& l : result.labels) labels.push_back(annotation::to_json(l));
      for (const auto& f : result.failures) failures.push_back({{"labeler_id", f.labeler_id}, {"reason", f.reason}});
      annotation::ConsensusResult cr;
      if (result.labels.size() >= 2) {
        cr = annotation::aggregate_coarse(result.labels, gate);
      } else {
        cr.sample_id = s.sample_id;  // one surviving label cannot pass the gate
      }
      cr.sample_id = s.sample_id;
      model_rows.push_back({{"sample_id", s.sample_id}, {"labels", labels}, {"failures", failures},
                            {"consensus", annotation::to_json(cr)}});
      if (cr.status == annotation::ConsensusStatus::flagged) {
        queue.enqueue(s.sample_id, {s.post_text, s.image.uri, s.comment.text}, result.labels);
      }
      consensus[s.sample_id] = cr;
    }
    st.write_jsonl("annotation/model_labels.jsonl", model_rows);

    std::size_t human = 0;
    if (config.human_labels) {
      util::for_each_jsonl(config.resolve(*config.human_labels), [&](const json& j, std::size_t) {
        queue.submit(annotation::annotation_record_from_json(j));
        ++human;
      });
    }
    st.add("annotation/events.jsonl");
    st.write_json("annotation/queue_snapshot.json", queue.snapshot());

    json agreement;
    try {
      agreement = annotation::to_json(annotation::compute_agreement_report(queue.human_records()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_dual_annotations) throw;
      agreement = {{"code", to_string(e.code())}, {"message", e.what()}};
    }
    st.write_json("annotation/agreement.json", agreement);

    std::vector<corpus::Sample> out_samples;
    std::vector<json> label_rows;
    std::size_t by_consensus = 0, by_human = 0, unresolved = 0;
    for (auto s : built.samples) {
      const auto& cr = consensus.at(s.sample_id);
      std::string source;
      if (cr.status == annotation::ConsensusStatus::unanimous) {
        s.stance = cr.final_stance;
        s.topic = cr.final_topic;
        source = "consensus";
        ++by_consensus;
      } else if (const auto e = queue.entry(s.sample_id); e && e->final_label) {
        s.stance = e->final_label->stance;
        s.topic = e->final_label->topic;
        if (e->final_label->style) s.comment.style = e->final_label->style;
        source = "human";
        ++by_human;
      } else {
        ++unresolved;
        continue;
      }
      s.comment.stance = s.stance;
      label_rows.push_back({{"sample_id", s.sample_id}, {"stance", to_string(*s.stance)},
                            {"topic", to_string(*s.topic)}, {"source", source}});
      out_samples.push_back(std::move(s));
    }
    st.write_jsonl("annotation/labels.jsonl", label_rows);
    if (!out_samples.empty()) {
      st.write_json("annotation/stats.json", corpus::to_json(corpus::corpus_stats({out_samples, {}})));
    }
    st.record().summary = {{"consensus", by_consensus}, {"human", by_human}, {"unresolved", unresolved},
                           {"human_records", human}, {"queued", queue.entries().size()}};
    manifest.stages.push_back(st.record());
    return out_samples;
  });

  // --- split + finetune config ----------------------------------------------
  const auto registry = generation::instruction_templates(
      config.templates ? std::optional<fs::path>(config.resolve(*config.templates)) : std::nullopt);
  generation::SplitResult split = in_stage("split", [&] {
    Stage st("split", out);
    auto r = generation::split_dataset(labeled, config.split_ratio, config.split_seed);
    st.write_jsonl("split/train.jsonl", rows_of(r.train));
    st.write_jsonl("split/test.jsonl", rows_of(r.test));
    generation::FinetuneConfig ft;
    ft.split_ratio = config.split_ratio;
    ft.seed = config.split_seed;
    ft = generation::apply_overrides(ft, config.finetune_overrides);
    st.write_json("split/finetune_config.json", generation::to_json(ft));
    for (const auto& [name, part] : {std::pair{"train", &r.train}, std::pair{"test", &r.test}}) {
      std::vector<json> rows;
      for (const auto& rec : generation::build_instruction_dataset(*part, registry, config.instruction_template)) {
        rows.push_back(generation::to_json(rec));
      }
      st.write_jsonl(std::string("split/instructions_") + name + ".jsonl", rows);
    }
    st.record().summary = {{"train", r.train.size()}, {"test", r.test.size()},
                           {"train_posts", r.train_posts}, {"test_posts", r.test_posts},
                           {"warnings", r.warnings}};
    manifest.stages.push_back(st.record());
    return r;
  });

  // --- sdmg fused features ----------------------------------------------------
  std::map<std::string, std::vector<double>> features = in_stage("sdmg", [&] {
    std::map<std::string, std::vector<double>> f;
    if (!config.sdmg_enabled) return f;
    Stage st("sdmg", out);
    const auto params = sdmg::init_params({config.d_v, config.d_t, config.d}, config.sdmg_seed);
    sdmg::save_tensors(st.path("sdmg/params.json"), sdmg::to_tensors(params));
    st.add("sdmg/params.json");
    const sdmg::ToyTransformerEncoder visual(config.d_v, config.encoder_layers, config.sdmg_seed + 1);
    const sdmg::ToyTransformerEncoder text(config.d_t, config.encoder_layers, config.sdmg_seed + 2);
    const sdmg::HashingTokenizer tokenizer;
    const sdmg::TokenEmbedding embedding(tokenizer.vocab(), config.d_t, config.sdmg_seed + 3);
    const auto mode = sdmg::parse_fuse_mode(config.fuse_mode);
    std::vector<json> rows;
    for (const auto& s : split.test) {
      std::string bytes;
      try {
        bytes = util::read_text(media_root / s.image.uri);
      } catch (const Error&) {
        fail(ErrorCode::image_unreadable, "cannot read " + (media_root / s.image.uri).string());
      }
      const auto patches = sdmg::image_patches(bytes, config.grid, config.d_v, config.sdmg_seed);
      const auto seq = sdmg::build_visual_input(patches, params.prompt, config.grid);
      const auto enc = sdmg::encode_visual(seq, &visual);
      const auto t = sdmg::encode_text(tokenizer.encode(s.post_text), embedding, &text);
      const sdmg::VecD attended = sdmg::tsa_attend_pooled<double>(enc.tokens, t.cls, params.proj);
      const auto fused = sdmg::fuse<double>(attended, params.W_t * t.cls, mode);
      std::vector<double> v(fused.values.data(), fused.values.data() + fused.values.size());
      rows.push_back({{"sample_id", s.sample_id}, {"mode", sdmg::to_string(mode)}, {"fused", v}});
      f[s.sample_id] = std::move(v);
    }
    st.write_jsonl("sdmg/features.jsonl", rows);
    st.record().summary = {{"features", rows.size()}, {"mode", sdmg::to_string(mode)}};
    manifest.stages.push_back(st.record());
    return f;
  });

  // --- generation -------------------------------------------------------------
  std::vector<generation::GeneratedResponse> responses;
  std::vector<generation::GenerationRequest> requests;
  in_stage("generation", [&] {
    Stage st("generation", out);
    std::unique_ptr<generation::Generator> gen;
    if (config.backend == "echo") {
      gen = std::make_unique<generation::EchoGenerator>();
    } else if (config.backend == "toy-prefix") {
      gen = std::make_unique<generation::ToyPrefixGenerator>(config.generation_seed);
    } else {
      const auto& h = config.http_backend;
      auto backend = std::make_shared<HttpChatBackend>(HttpChatBackend::Config{
          h.at("base_url").get<std::string>(), h.at("model").get<std::string>(), h.value("api_key_env", "")});
      ChatOptions opts;
      opts.temperature = h.value("temperature", 0.0);
      gen = std::make_unique<generation::ChatGenerator>("http", backend, opts);
    }
    for (const auto& s : split.test) {
      generation::GenerationRequest r;
      r.request_id = s.sample_id;
      r.sample_id = s.sample_id;
      r.instruction = generation::build_instruction(s, *s.stance, registry, config.instruction_template);
      r.post_text = s.post_text;
      r.image_path = s.image.uri;
      r.stance = *s.stance;
      r.backend_id = gen->id();
      if (const auto it = features.find(s.sample_id); it != features.end()) r.conditioning = it->second;
      r.reference_comment = s.comment.text;
      r.target = target_tag(s.author);
      requests.push_back(std::move(r));
    }
    responses = generation::generate_batch(requests, *gen, config.max_in_flight);
    std::vector<json> req_rows, resp_rows;
    for (const auto& r : requests) req_rows.push_back(generation::to_json(r));
    for (const auto& r : responses) resp_rows.push_back(generation::to_json(r, false));
    st.write_jsonl("generation/requests.jsonl", req_rows);
    st.write_jsonl("generation/responses.jsonl", resp_rows);
    st.record().summary = {{"requests", requests.size()}, {"backend", gen->id()}};
    manifest.stages.push_back(st.record());
    return 0;
  });

  // --- eval -------------------------------------------------------------------
  in_stage("eval", [&] {
    Stage st("eval", out);
    std::vector<eval::EvalItem> items;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      eval::EvalItem it;
      it.item_id = requests[i].request_id;
      it.sample_id = requests[i].sample_id;
      it.requested = requests[i].stance;
      it.generated = responses[i].text;
      it.reference = requests[i].reference_comment.value_or("");
      it.image_path = requests[i].image_path;
      it.model = config.model_name;
      it.modality = eval::try_parse_modality(config.modality);
      it.target = requests[i].target;
      items.push_back(std::move(it));
    }
    std::vector<json> item_rows;
    for (const auto& it : items) item_rows.push_back(eval::to_json(it));
    st.write_jsonl("eval/items.jsonl", item_rows);

    auto resolved = items;
    for (auto& it : resolved) it.image_path = (media_root / it.image_path).string();
    const auto backends = eval::make_backends(config.eval_backends, config.base_dir);
    const auto scores = eval::score_items(resolved, backends);
    std::vector<json> score_rows;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const auto& s = scores[i];
      score_rows.push_back({{"item_id", items[i].item_id},
                            {"predicted", to_string(s.predicted)},
                            {"stance_match", s.stance_match},
                            {"tokens", s.tokens},
                            {"perplexity", s.perplexity},
                            {"relevance", s.relevance},
                            {"cmss", s.cmss}});
    }
    st.write_jsonl("eval/scores.jsonl", score_rows);

    const bool all_targets = std::all_of(items.begin(), items.end(), [](const auto& it) { return it.target.has_value(); });
    const bool by_target = config.report_by_target && all_targets;
    if (config.report_by_target && !all_targets) spdlog::warn("eval: some items lack a target tag; reporting without the H/T split");
    const auto report = eval::build_report(items, scores, false);
    st.write_json("eval/report.json", eval::to_json(report));
    st.write_text("eval/report.txt", eval::render_text(report));
    st.write_text("eval/report.csv", eval::render_csv(report));
    if (by_target) {
      const auto split_report = eval::build_report(items, scores, true);
      st.write_json("eval/report_by_target.json", eval::to_json(split_report));
      st.write_text("eval/report_by_target.txt", eval::render_text(split_report));
      st.write_text("eval/report_by_target.csv", eval::render_csv(split_report));
    }
    const auto& cell = report.rows.front().cells.begin()->second;
    st.record().summary = {{"items", items.size()},
                           {"controllability", cell.controllability},
                           {"cmss", cell.cmss},
                           {"relevance", cell.relevance},
                           {"perplexity", cell.perplexity}};
    manifest.stages.push_back(st.record());
    return 0;
  });

  util::write_json(out / "manifest.json", to_json(manifest));
  return manifest;
}

ReplayResult replay(const RunManifest& manifest, const fs::path& output) {
  json cfg = manifest.config;
  cfg["paths"]["output"] = fs::absolute(output).string();
  RunConfig config = parse_run_config(cfg, manifest.config_dir);
  ReplayResult r;
  r.rerun = run_end_to_end(config);
  r.mismatches = compare_artifacts(manifest.artifacts(), r.rerun.artifacts());
  for (const auto& [name, hash] : manifest.inputs) {
    const auto it = r.rerun.inputs.find(name);
    if (it == r.rerun.inputs.end() || it->second != hash) r.mismatches.push_back("input " + name + " changed");
  }
  r.identical = r.mismatches.empty();
  return r;
}

}  // namespace stancegen::run
