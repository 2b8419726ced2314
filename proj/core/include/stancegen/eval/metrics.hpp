// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/types.hpp"

namespace stancegen::eval {

enum class Modality { textual, visual, multimodal };

std::string to_string(Modality m);  // "Textual" | "Visual" | "Multi-modal"
std::optional<Modality> try_parse_modality(const std::string& s);

struct EvalItem {
  std::string item_id;
  std::string sample_id;
  Stance requested = Stance::favor;
  std::string generated;
  std::string reference;
  std::string image_path;  // parent post image
  std::optional<std::string> model;
  std::optional<Modality> modality;
  std::optional<std::string> target;  // "H" | "T"
};

nlohmann::json to_json(const EvalItem& item);
EvalItem eval_item_from_json(const nlohmann::json& j);
std::vector<EvalItem> load_eval_items(const std::filesystem::path& path);

// --- pluggable backends ---------------------------------------------------

class StanceClassifier {
 public:
  virtual ~StanceClassifier() = default;
  virtual std::string id() const = 0;
  virtual Stance classify(const std::string& text) const = 0;
  /// 0 means no cap.
  virtual std::size_t max_concurrency() const { return 0; }
};

/// "[FAVOR]" / "[AGAINST]" tags decide when present (first tag wins);
/// otherwise a small lexicon vote, ties going to AGAINST.
class KeywordClassifier final : public StanceClassifier {
 public:
  std::string id() const override { return "keyword"; }
  Stance classify(const std::string& text) const override;
};

/// Exact text -> stance table; unknown texts raise ClassifierUnavailable.
class ScriptedClassifier final : public StanceClassifier {
 public:
  explicit ScriptedClassifier(std::map<std::string, Stance> table) : table_(std::move(table)) {}
  std::string id() const override { return "scripted"; }
  Stance classify(const std::string& text) const override;

 private:
  std::map<std::string, Stance> table_;
};

struct LmScore {
  long double log_likelihood = 0.0L;  // natural log, summed over tokens
  std::size_t tokens = 0;
};

class LmScorer {
 public:
  virtual ~LmScorer() = default;
  virtual std::string id() const = 0;
  virtual LmScore score(const std::string& text) const = 0;
  virtual std::size_t max_concurrency() const { return 0; }
};

/// Every whitespace token has probability 1/vocab.
class UniformScorer final : public LmScorer {
 public:
  explicit UniformScorer(std::size_t vocab) : vocab_(vocab) {}
  std::string id() const override { return "uniform"; }
  LmScore score(const std::string& text) const override;

 private:
  std::size_t vocab_;
};

/// Exact text -> per-token log-probabilities.
class ScriptedScorer final : public LmScorer {
 public:
  explicit ScriptedScorer(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {}
  std::string id() const override { return "scripted"; }
  LmScore score(const std::string& text) const override;

 private:
  std::map<std::string, std::vector<double>> table_;
};

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::string id() const = 0;
  virtual std::vector<double> embed(const std::string& text) const = 0;
  virtual std::size_t max_concurrency() const { return 0; }
};

/// Signed feature hashing of lowercased word unigrams.
class HashingEmbedder final : public TextEmbedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}
  std::string id() const override { return "hashing"; }
  std::vector<double> embed(const std::string& text) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

class ScriptedEmbedder final : public TextEmbedder {
 public:
  explicit ScriptedEmbedder(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {}
  std::string id() const override { return "scripted"; }
  std::vector<double> embed(const std::string& text) const override;

 private:
  std::map<std::string, std::vector<double>> table_;
};

class JointEmbedder {
 public:
  virtual ~JointEmbedder() = default;
  virtual std::string id() const = 0;
  virtual std::vector<double> embed_text(const std::string& text) const = 0;
  /// Throws ImageUnreadable.
  virtual std::vector<double> embed_image(const std::filesystem::path& image) const = 0;
  /// Text context in whitespace tokens; longer texts are truncated first.
  virtual std::size_t context_limit() const { return 77; }
  virtual std::size_t max_concurrency() const { return 0; }
};

/// Texts via feature hashing; images via byte-histogram patch features
/// averaged and lifted to the same dimension with a seeded projection.
class HashingJointEmbedder final : public JointEmbedder {
 public:
  explicit HashingJointEmbedder(std::size_t dim = 64, std::uint64_t seed = 0, std::size_t context_limit = 77);
  std::string id() const override { return "hashing-joint"; }
  std::vector<double> embed_text(const std::string& text) const override;
  std::vector<double> embed_image(const std::filesystem::path& image) const override;
  std::size_t context_limit() const override { return context_limit_; }

 private:
  HashingEmbedder text_;
  std::size_t dim_;
  std::uint64_t seed_;
  std::size_t context_limit_;
};

/// Text and image-path lookup tables. Missing images raise ImageUnreadable.
class ScriptedJointEmbedder final : public JointEmbedder {
 public:
  ScriptedJointEmbedder(std::map<std::string, std::vector<double>> text,
                        std::map<std::string, std::vector<double>> images, std::size_t context_limit = 77)
      : text_(std::move(text)), images_(std::move(images)), context_limit_(context_limit) {}
  std::string id() const override { return "scripted-joint"; }
  std::vector<double> embed_text(const std::string& text) const override;
  std::vector<double> embed_image(const std::filesystem::path& image) const override;
  std::size_t context_limit() const override { return context_limit_; }

 private:
  std::map<std::string, std::vector<double>> text_;
  std::map<std::string, std::vector<double>> images_;
  std::size_t context_limit_;
};

// --- metrics ----------------------------------------------------------------

/// Raw cosine in [-1, 1]; 0 when either vector is all zeros. Mismatched
/// dimensions raise DimensionMismatch.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// ppl = exp(-logL / tokens). Throws ZeroTokens.
double response_perplexity(const LmScore& s);

/// First `limit` whitespace tokens, single-spaced. Logs when it cuts.
std::string truncate_to_context(const std::string& text, std::size_t limit);

double controllability(const std::vector<EvalItem>& items, const StanceClassifier* classifier);

struct PerplexityResult {
  double mean = 0.0;            // arithmetic mean of per-response values
  double token_weighted = 0.0;  // exp(-sum logL / sum tokens)
  std::vector<double> per_item;
};

PerplexityResult perplexity(const std::vector<EvalItem>& items, const LmScorer* scorer);
double relevance(const std::vector<EvalItem>& items, const TextEmbedder* embedder);
double cmss(const std::vector<EvalItem>& items, const JointEmbedder* embedder);

/// Per-item metric inputs, reduced later by build_report.
struct ItemScores {
  bool stance_match = false;
  Stance predicted = Stance::favor;
  long double log_likelihood = 0.0L;
  std::size_t tokens = 0;
  double perplexity = 0.0;
  double relevance = 0.0;
  double cmss = 0.0;
};

struct EvalBackends {
  std::shared_ptr<const StanceClassifier> classifier;
  std::shared_ptr<const LmScorer> scorer;
  std::shared_ptr<const TextEmbedder> embedder;
  std::shared_ptr<const JointEmbedder> joint_embedder;
  std::size_t threads = 1;
};

/// Backend config, e.g.
///   {"classifier": {"type": "keyword"},
///    "scorer": {"type": "uniform", "vocab": 100},
///    "embedder": {"type": "hashing", "dim": 256, "seed": 0},
///    "joint_embedder": {"type": "hashing", "dim": 64, "seed": 0, "context_limit": 77},
///    "threads": 1}
/// Scripted backends take "path" to a JSON table, relative to base_dir.
EvalBackends make_backends(const nlohmann::json& config, const std::filesystem::path& base_dir = {});

/// Scores every item with all four backends; threads are capped by the
/// smallest declared backend limit. Order of results matches items.
std::vector<ItemScores> score_items(const std::vector<EvalItem>& items, const EvalBackends& backends);

}  // namespace stancegen::eval
