// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/error.hpp"

namespace stancegen::run {

std::string version();

/// An Error raised inside a pipeline stage, tagged with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct LabelerSpec {
  std::string id;
  std::string type;  // "scripted" | "http"
  std::string path;  // scripted: JSON object sample_id -> reply
  std::string base_url;
  std::string model;
  std::string api_key_env;
};

struct RunConfig {
  std::string run_name = "run";
  std::filesystem::path base_dir;  // relative paths resolve against this

  // paths
  std::filesystem::path posts;
  std::filesystem::path comments;
  std::filesystem::path media_root;
  std::filesystem::path output;
  std::optional<std::filesystem::path> templates;
  std::optional<std::filesystem::path> human_labels;

  // filters
  std::size_t min_words = 10;
  std::size_t max_words = 128;
  double lang_threshold = 0.9;
  bool length_filter_posts = true;
  std::optional<std::string> window_start;
  std::optional<std::string> window_end;
  std::optional<std::string> frame_command;

  // seeds (all required in the file)
  std::uint64_t split_seed = 0;
  std::uint64_t sdmg_seed = 0;
  std::uint64_t generation_seed = 0;

  // annotation
  std::vector<LabelerSpec> labelers;
  std::string gate = "unanimity";
  std::string labeler_template = "coarse_label_v1";

  // split / finetune
  double split_ratio = 0.8;
  std::map<std::string, std::string> finetune_overrides;

  // sdmg
  bool sdmg_enabled = true;
  int d_v = 16, d_t = 16, d = 16, grid = 2, encoder_layers = 2;
  std::string fuse_mode = "concat";

  // generation
  std::string backend = "echo";  // "echo" | "toy-prefix" | "http"
  std::string instruction_template = "instruction_v1";
  std::string model_name = "stub";
  std::string modality = "Multi-modal";
  std::size_t max_in_flight = 1;
  nlohmann::json http_backend = nlohmann::json::object();

  // eval
  nlohmann::json eval_backends = nlohmann::json::object();
  bool report_by_target = true;

  // service
  int service_port = 8080;
  bool live = false;

  nlohmann::json source;  // the file as loaded, embedded in the manifest

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Parses and validates. Missing inputs, missing seeds, and live backends
/// without "live": true raise ConfigError before anything runs.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& c);

struct StageRecord {
  std::string name;
  std::map<std::string, std::string> artifacts;  // path relative to output -> sha256
  nlohmann::json summary;
};

struct RunManifest {
  std::string run_name;
  std::string version;
  nlohmann::json config;
  std::string config_dir;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> inputs;  // logical name -> sha256
  std::vector<StageRecord> stages;

  /// Every artifact across stages.
  std::map<std::string, std::string> artifacts() const;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

/// build_corpus -> coarse annotation -> split -> sdmg features -> generate
/// -> eval. Writes every artifact plus manifest.json under config.output.
RunManifest run_end_to_end(const RunConfig& config);

struct ReplayResult {
  bool identical = true;
  std::vector<std::string> mismatches;  // "path: expected X got Y" or missing files
  RunManifest rerun;
};

/// Reruns the embedded config into `output` and compares artifact hashes.
ReplayResult replay(const RunManifest& manifest, const std::filesystem::path& output);

/// Artifact differences between two manifests (empty: identical).
std::vector<std::string> compare_artifacts(const std::map<std::string, std::string>& expected,
                                           const std::map<std::string, std::string>& actual);

}  // namespace stancegen::run
