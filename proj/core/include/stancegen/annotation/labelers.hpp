// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/chat.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/util/text_template.hpp"

namespace stancegen::annotation {

struct ModelLabel {
  std::string labeler_id;
  std::string sample_id;
  Stance stance = Stance::favor;
  Topic topic = Topic::other;
  std::string raw_response;

  bool operator==(const ModelLabel&) const = default;
};

struct LabelerFailure {
  std::string labeler_id;
  std::string reason;
};

struct LabelingResult {
  std::vector<ModelLabel> labels;
  std::vector<LabelerFailure> failures;
};

/// A machine labeler. label() throws on any failure; the caller records it.
class LabelerClient {
 public:
  virtual ~LabelerClient() = default;
  virtual const std::string& id() const = 0;
  virtual ModelLabel label(const corpus::Sample& sample) = 0;
};

/// Strict parse of a labeler reply. The whole reply must be
///
///   STANCE: <FAVOR|AGAINST>
///   TOPIC: <topic name>
///
/// with optional surrounding whitespace; anything else is rejected.
std::optional<std::pair<Stance, Topic>> parse_label_response(const std::string& response);

/// Slots of the coarse-labeling prompt template.
inline const std::set<std::string> coarse_prompt_required_slots{"post_text", "comment_text"};
inline const std::set<std::string> coarse_prompt_optional_slots{"image", "target"};

/// Renders the prompt template, calls the chat backend through the retry
/// policy, and parses the reply.
class ChatLabelerClient final : public LabelerClient {
 public:
  ChatLabelerClient(std::string id, std::shared_ptr<ChatBackend> backend,
                    util::TextTemplate prompt, RetryPolicy retry = {});

  const std::string& id() const override { return id_; }
  ModelLabel label(const corpus::Sample& sample) override;

 private:
  std::string id_;
  std::shared_ptr<ChatBackend> backend_;
  util::TextTemplate prompt_;
  RetryPolicy retry_;
};

/// Replays canned replies keyed by sample id (falling back to the comment id).
/// Replies still go through parse_label_response.
class ScriptedLabeler final : public LabelerClient {
 public:
  ScriptedLabeler(std::string id, std::map<std::string, std::string> replies);

  const std::string& id() const override { return id_; }
  ModelLabel label(const corpus::Sample& sample) override;

 private:
  std::string id_;
  std::map<std::string, std::string> replies_;
};

/// One label per labeler that answered; failures are listed, never filled in.
/// Needs at least two labelers; throws Error{all_labelers_failed} when no
/// labeler produced a parseable label.
LabelingResult request_model_labels(const corpus::Sample& sample,
                                    const std::vector<LabelerClient*>& labelers);

enum class GateMode { unanimity, majority };

enum class ConsensusStatus { unanimous, flagged };

struct ConsensusResult {
  std::string sample_id;
  ConsensusStatus status = ConsensusStatus::flagged;
  std::optional<Stance> final_stance;
  std::optional<Topic> final_topic;
};

/// Unanimity: every label has the same (stance, topic). Majority: one
/// (stance, topic) pair held by more than half of the labels. Either way the
/// status is reported as `unanimous` when the gate passes. Throws
/// Error{insufficient_labels} below two labels.
ConsensusResult aggregate_coarse(const std::vector<ModelLabel>& labels,
                                 GateMode mode = GateMode::unanimity);

nlohmann::json to_json(const ModelLabel& l);
ModelLabel model_label_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConsensusResult& c);
std::string_view to_string(ConsensusStatus s);

}  // namespace stancegen::annotation
