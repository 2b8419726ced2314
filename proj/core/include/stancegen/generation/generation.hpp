// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/chat.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/templates.hpp"
#include "stancegen/types.hpp"

namespace stancegen::generation {

inline constexpr const char* default_instruction_template = "instruction_v1";
inline constexpr const char* image_marker = "<image>";

/// Slot contract for instruction templates.
const TemplateRegistry::Contract& instruction_contract();

/// Built-in instruction templates plus any instruction_*.txt in `dir`.
TemplateRegistry instruction_templates(const std::optional<std::filesystem::path>& dir = {});

/// "in favor of" / "against".
std::string stance_directive(Stance s);
/// "Kamala Harris" / "Donald Trump" / "the post author".
std::string target_name(Author a);

std::string build_instruction(const corpus::Sample& sample, Stance stance,
                              const TemplateRegistry& registry,
                              const std::string& template_id = default_instruction_template);

// --- split ----------------------------------------------------------------

struct SplitResult {
  std::vector<corpus::Sample> train;
  std::vector<corpus::Sample> test;
  std::size_t train_posts = 0;
  std::size_t test_posts = 0;
  std::vector<std::string> warnings;
};

/// Group-by-post split: the sorted distinct post ids are shuffled with the
/// seed and the first round(ratio * posts) go to train. Samples keep their
/// input order within each side. Throws EmptyCorpus.
SplitResult split_dataset(const std::vector<corpus::Sample>& samples, double ratio,
                          std::uint64_t seed);

// --- fine-tuning configuration --------------------------------------------

struct FinetuneConfig {
  double learning_rate = 2e-4;
  int batch_size = 16;
  int max_seq_len = 2048;
  double split_ratio = 0.8;
  std::string adapter = "lora";
  std::string optimizer = "adamw";
  std::string sharding = "deepspeed-zero2";
  std::uint64_t seed = 7;

  bool operator==(const FinetuneConfig&) const = default;
};

/// Applies "key=value" style overrides. Unknown keys, unparsable values and
/// out-of-range values raise InvalidOverride.
FinetuneConfig apply_overrides(FinetuneConfig base, const std::map<std::string, std::string>& overrides);
void validate(const FinetuneConfig& c);

nlohmann::json to_json(const FinetuneConfig& c);
FinetuneConfig finetune_config_from_json(const nlohmann::json& j);
void write_finetune_config(const std::filesystem::path& path, const FinetuneConfig& c);
FinetuneConfig read_finetune_config(const std::filesystem::path& path);

// --- requests and backends ------------------------------------------------

struct GenerationRequest {
  std::string request_id;
  std::string sample_id;
  std::string instruction;
  std::string post_text;
  std::string image_path;
  Stance stance = Stance::favor;
  std::string backend_id;
  /// Conditioning vector (e.g. a fused feature); only the toy backend reads it.
  std::optional<std::vector<double>> conditioning;
  std::optional<std::string> reference_comment;
  std::optional<std::string> target;  // "H" / "T"
};

struct GeneratedResponse {
  std::string request_id;
  std::string text;
  std::string backend_id;
  std::chrono::microseconds latency{0};
  nlohmann::json raw;
};

struct BackendOutput {
  std::string text;
  nlohmann::json raw;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string id() const = 0;
  /// Must be safe to call from several threads.
  virtual BackendOutput complete(const GenerationRequest& request) = 0;
};

/// text = "[" + STANCE + "] " + instruction.
class EchoGenerator final : public Generator {
 public:
  std::string id() const override { return "echo"; }
  BackendOutput complete(const GenerationRequest& request) override;
};

/// Tiny local generator: the conditioning vector acts as a single prefix
/// embedding that scores a fixed phrase bank plus the post's own words;
/// the stance picks the phrase half. Output starts with "[STANCE] ".
class ToyPrefixGenerator final : public Generator {
 public:
  explicit ToyPrefixGenerator(std::uint64_t seed = 7, std::size_t words = 12);
  std::string id() const override { return "toy-prefix"; }
  BackendOutput complete(const GenerationRequest& request) override;

 private:
  std::uint64_t seed_;
  std::size_t words_;
};

/// Forwards the instruction to a chat backend with retries.
class ChatGenerator final : public Generator {
 public:
  ChatGenerator(std::string id, std::shared_ptr<ChatBackend> backend, ChatOptions options = {},
                RetryPolicy retry = {});
  std::string id() const override { return id_; }
  BackendOutput complete(const GenerationRequest& request) override;

 private:
  std::string id_;
  std::shared_ptr<ChatBackend> backend_;
  ChatOptions options_;
  RetryPolicy retry_;
};

/// Throws BackendUnavailable (backend failures, exhausted retries) and
/// EmptyGeneration (blank text).
GeneratedResponse generate(const GenerationRequest& request, Generator& generator);

/// Runs up to `max_in_flight` requests at once. responses[i] answers requests[i].
std::vector<GeneratedResponse> generate_batch(const std::vector<GenerationRequest>& requests,
                                              Generator& generator, std::size_t max_in_flight = 4);

nlohmann::json to_json(const GenerationRequest& r);
GenerationRequest request_from_json(const nlohmann::json& j);
/// `with_latency` false drops the timing field so outputs hash stably.
nlohmann::json to_json(const GeneratedResponse& r, bool with_latency = true);
GeneratedResponse response_from_json(const nlohmann::json& j);

/// Line-delimited {sample_id, instruction, image_path, stance, reference_comment}.
struct InstructionRecord {
  std::string sample_id;
  std::string instruction;
  std::string image_path;
  Stance stance = Stance::favor;
  std::string reference_comment;
};

nlohmann::json to_json(const InstructionRecord& r);
InstructionRecord instruction_record_from_json(const nlohmann::json& j);

/// One record per labeled sample, stance = the sample's own label, so the
/// reference comment is a real reply with that stance. Unlabeled samples
/// are skipped.
std::vector<InstructionRecord> build_instruction_dataset(const std::vector<corpus::Sample>& samples,
                                                         const TemplateRegistry& registry,
                                                         const std::string& template_id =
                                                             default_instruction_template);

}  // namespace stancegen::generation
