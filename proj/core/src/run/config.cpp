// SPDX-License-Identifier: Apache-2.0
#include "stancegen/run/run.hpp"

#include "stancegen/corpus/corpus.hpp"
#include "stancegen/eval/metrics.hpp"
#include "stancegen/generation/generation.hpp"
#include "stancegen/sdmg/fusion.hpp"
#include "stancegen/util/jsonl.hpp"

namespace stancegen::run {

using nlohmann::json;

std::string version() { return STANCEGEN_VERSION; }

StageError::StageError(std::string stage, const Error& inner)
    : Error(inner.code(), "[" + stage + "] " + inner.what()), stage_(std::move(stage)) {}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() || p.empty() ? p : base_dir / p;
}

namespace {

[[noreturn]] void config_fail(const std::string& msg) { fail(ErrorCode::config_error, msg); }

json section(const json& j, const char* key) {
  if (!j.contains(key)) return json::object();
  if (!j[key].is_object()) config_fail(std::string("'") + key + "' must be an object");
  return j[key];
}

std::string scalar_string(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_fail("run config must be a JSON object");
  RunConfig c;
  c.source = j;
  c.base_dir = base_dir;
  try {
    c.run_name = j.value("run_name", c.run_name);
    const json paths = section(j, "paths");
    for (const char* k : {"posts", "comments", "output"}) {
      if (!paths.contains(k)) config_fail(std::string("paths.") + k + " is required");
    }
    c.posts = paths["posts"].get<std::string>();
    c.comments = paths["comments"].get<std::string>();
    c.output = paths["output"].get<std::string>();
    c.media_root = paths.value("media_root", ".");
    if (paths.contains("templates")) c.templates = paths["templates"].get<std::string>();
    if (paths.contains("human_labels")) c.human_labels = paths["human_labels"].get<std::string>();

    const json filters = section(j, "filters");
    c.min_words = filters.value("min_words", c.min_words);
    c.max_words = filters.value("max_words", c.max_words);
    c.lang_threshold = filters.value("lang_threshold", c.lang_threshold);
    c.length_filter_posts = filters.value("length_filter_posts", c.length_filter_posts);
    if (filters.contains("window")) {
      c.window_start = filters["window"].at("start").get<std::string>();
      c.window_end = filters["window"].at("end").get<std::string>();
    }
    if (filters.contains("frame_command")) c.frame_command = filters["frame_command"].get<std::string>();

    const json seeds = section(j, "seeds");
    for (const char* k : {"split", "sdmg", "generation"}) {
      if (!seeds.contains(k)) config_fail(std::string("seeds.") + k + " must be set explicitly");
    }
    c.split_seed = seeds["split"].get<std::uint64_t>();
    c.sdmg_seed = seeds["sdmg"].get<std::uint64_t>();
    c.generation_seed = seeds["generation"].get<std::uint64_t>();

    const json ann = section(j, "annotation");
    c.gate = ann.value("gate", c.gate);
    c.labeler_template = ann.value("template", c.labeler_template);
    const json labelers = ann.value("labelers", json::array());
    for (const auto& l : labelers) {
      LabelerSpec s;
      s.id = l.at("id").get<std::string>();
      s.type = l.value("type", "scripted");
      s.path = l.value("path", "");
      s.base_url = l.value("base_url", "");
      s.model = l.value("model", "");
      s.api_key_env = l.value("api_key_env", "");
      c.labelers.push_back(std::move(s));
    }

    c.split_ratio = section(j, "split").value("ratio", c.split_ratio);
    const json overrides = section(j, "finetune").value("overrides", json::object());
    for (const auto& [k, v] : overrides.items()) {
      c.finetune_overrides[k] = scalar_string(v);
    }

    const json s = section(j, "sdmg");
    c.sdmg_enabled = s.value("enabled", c.sdmg_enabled);
    c.d_v = s.value("d_v", c.d_v);
    c.d_t = s.value("d_t", c.d_t);
    c.d = s.value("d", c.d);
    c.grid = s.value("grid", c.grid);
    c.encoder_layers = s.value("encoder_layers", c.encoder_layers);
    c.fuse_mode = s.value("mode", c.fuse_mode);

    const json g = section(j, "generation");
    c.backend = g.value("backend", c.backend);
    c.instruction_template = g.value("template", c.instruction_template);
    c.model_name = g.value("model", c.model_name);
    c.modality = g.value("modality", c.modality);
    c.max_in_flight = g.value("max_in_flight", c.max_in_flight);
    c.http_backend = g.value("http", json::object());

    const json e = section(j, "eval");
    c.eval_backends = e.value("backends", json::object());
    c.report_by_target = e.value("by_target", c.report_by_target);

    c.service_port = section(j, "service").value("port", c.service_port);
    c.live = j.value("live", false);
  } catch (const json::exception& e) {
    config_fail(std::string("run config: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) config_fail("config file not found: " + path.string());
  json j;
  try {
    j = util::read_json(path);
  } catch (const Error& e) {
    config_fail(e.what());
  }
  return parse_run_config(j, std::filesystem::absolute(path).parent_path());
}

void validate(const RunConfig& c) {
  auto must_exist = [&](const std::filesystem::path& p, const std::string& what) {
    if (!std::filesystem::exists(c.resolve(p))) config_fail(what + " not found: " + c.resolve(p).string());
  };
  must_exist(c.posts, "posts file");
  must_exist(c.comments, "comments file");
  must_exist(c.media_root, "media root");
  if (c.templates) must_exist(*c.templates, "template directory");
  if (c.human_labels) must_exist(*c.human_labels, "human labels file");
  if (c.output.empty()) config_fail("paths.output is empty");
  if (c.min_words > c.max_words) config_fail("filters.min_words exceeds max_words");
  if (!(c.lang_threshold >= 0.0 && c.lang_threshold <= 1.0)) config_fail("filters.lang_threshold must lie in [0, 1]");
  if (c.window_start) {
    try {
      corpus::parse_timestamp(*c.window_start);
      corpus::parse_timestamp(*c.window_end);
    } catch (const Error& e) {
      config_fail(std::string("filters.window: ") + e.what());
    }
  }
  if (c.labelers.size() < 2) config_fail("annotation needs at least two labelers");
  for (const auto& l : c.labelers) {
    if (l.type == "scripted") {
      must_exist(l.path, "labeler '" + l.id + "' script");
    } else if (l.type == "http") {
      if (!c.live) config_fail("labeler '" + l.id + "' is live; set \"live\": true to allow network backends");
      if (l.base_url.empty() || l.model.empty()) config_fail("labeler '" + l.id + "' needs base_url and model");
    } else {
      config_fail("labeler '" + l.id + "' has unknown type '" + l.type + "'");
    }
  }
  if (c.gate != "unanimity" && c.gate != "majority") config_fail("annotation.gate must be unanimity or majority");
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) config_fail("split.ratio must lie in (0, 1)");
  try {
    generation::apply_overrides({}, c.finetune_overrides);
  } catch (const Error& e) {
    config_fail(std::string("finetune.overrides: ") + e.what());
  }
  if (c.d_v <= 0 || c.d_t <= 0 || c.d <= 0 || c.grid <= 0 || c.encoder_layers < 0) {
    config_fail("sdmg dims must be positive");
  }
  try {
    sdmg::parse_fuse_mode(c.fuse_mode);
  } catch (const Error& e) {
    config_fail(e.what());
  }
  if (c.backend == "http") {
    if (!c.live) config_fail("generation backend 'http' is live; set \"live\": true to allow it");
    if (!c.http_backend.contains("base_url") || !c.http_backend.contains("model")) {
      config_fail("generation.http needs base_url and model");
    }
  } else if (c.backend != "echo" && c.backend != "toy-prefix") {
    config_fail("unknown generation backend '" + c.backend + "'");
  }
  if (!eval::try_parse_modality(c.modality)) config_fail("unknown modality '" + c.modality + "'");
  if (c.max_in_flight == 0) config_fail("generation.max_in_flight must be positive");
  if (c.service_port < 0 || c.service_port > 65535) config_fail("service.port out of range");
  try {
    eval::make_backends(c.eval_backends, c.base_dir);
  } catch (const Error& e) {
    config_fail(std::string("eval.backends: ") + e.what());
  }
}

}  // namespace stancegen::run
