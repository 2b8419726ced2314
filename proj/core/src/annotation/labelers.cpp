// SPDX-License-Identifier: Apache-2.0
#include "stancegen/annotation/labelers.hpp"

#include <regex>

#include "stancegen/error.hpp"

namespace stancegen::annotation {

using nlohmann::json;

std::optional<std::pair<Stance, Topic>> parse_label_response(const std::string& response) {
  static const std::regex pattern(
      R"(^[ \t\r\n]*STANCE:[ \t]*(FAVOR|AGAINST)[ \t]*\r?\n[ \t]*TOPIC:[ \t]*([A-Z_]+)[ \t\r\n]*$)");
  std::smatch m;
  if (!std::regex_match(response, m, pattern)) return std::nullopt;
  const auto topic = try_parse_topic(m[2].str());
  if (!topic) return std::nullopt;
  return std::make_pair(parse_stance(m[1].str()), *topic);
}

namespace {

ModelLabel parsed_or_throw(const std::string& labeler, const corpus::Sample& sample,
                           const std::string& reply) {
  const auto parsed = parse_label_response(reply);
  if (!parsed) fail(ErrorCode::schema_error, "unparseable labeler reply");
  return ModelLabel{labeler, sample.sample_id, parsed->first, parsed->second, reply};
}

}  // namespace

ChatLabelerClient::ChatLabelerClient(std::string id, std::shared_ptr<ChatBackend> backend,
                                     util::TextTemplate prompt, RetryPolicy retry)
    : id_(std::move(id)), backend_(std::move(backend)), prompt_(std::move(prompt)),
      retry_(std::move(retry)) {
  const auto problems = prompt_.lint(coarse_prompt_required_slots, coarse_prompt_optional_slots);
  if (!problems.empty()) {
    fail(ErrorCode::unknown_template, "prompt template " + prompt_.id() + ": " + problems.front());
  }
}

ModelLabel ChatLabelerClient::label(const corpus::Sample& sample) {
  const std::string prompt = prompt_.render({
      {"post_text", sample.post_text},
      {"comment_text", sample.comment.text},
      {"image", sample.image.uri},
      {"target", sample.author == Author::harris  ? "Kamala Harris"
                 : sample.author == Author::trump ? "Donald Trump"
                                                  : "the post author"},
  });
  const std::string reply =
      with_retry(retry_, [&] { return backend_->complete(prompt, ChatOptions{}); });
  return parsed_or_throw(id_, sample, reply);
}

ScriptedLabeler::ScriptedLabeler(std::string id, std::map<std::string, std::string> replies)
    : id_(std::move(id)), replies_(std::move(replies)) {}

ModelLabel ScriptedLabeler::label(const corpus::Sample& sample) {
  auto it = replies_.find(sample.sample_id);
  if (it == replies_.end()) it = replies_.find(sample.comment.id);
  if (it == replies_.end()) fail(ErrorCode::not_found, "no scripted reply for " + sample.sample_id);
  return parsed_or_throw(id_, sample, it->second);
}

LabelingResult request_model_labels(const corpus::Sample& sample,
                                    const std::vector<LabelerClient*>& labelers) {
  if (labelers.size() < 2) {
    fail(ErrorCode::invalid_argument, "coarse labeling needs at least two labelers");
  }
  LabelingResult result;
  for (LabelerClient* labeler : labelers) {
    try {
      result.labels.push_back(labeler->label(sample));
    } catch (const std::exception& e) {
      result.failures.push_back({labeler->id(), e.what()});
    }
  }
  if (result.labels.empty()) {
    fail(ErrorCode::all_labelers_failed, "no labeler returned a label for " + sample.sample_id);
  }
  return result;
}

ConsensusResult aggregate_coarse(const std::vector<ModelLabel>& labels, GateMode mode) {
  if (labels.size() < 2) {
    fail(ErrorCode::insufficient_labels,
         "consensus needs at least two labels, got " + std::to_string(labels.size()));
  }
  ConsensusResult result;
  result.sample_id = labels.front().sample_id;

  std::map<std::pair<Stance, Topic>, std::size_t> votes;
  for (const auto& l : labels) ++votes[{l.stance, l.topic}];

  std::optional<std::pair<Stance, Topic>> winner;
  if (mode == GateMode::unanimity) {
    if (votes.size() == 1) winner = votes.begin()->first;
  } else {
    for (const auto& [pair, count] : votes) {
      if (2 * count > labels.size()) winner = pair;
    }
  }
  if (winner) {
    result.status = ConsensusStatus::unanimous;
    result.final_stance = winner->first;
    result.final_topic = winner->second;
  }
  return result;
}

std::string_view to_string(ConsensusStatus s) {
  return s == ConsensusStatus::unanimous ? "UNANIMOUS" : "FLAGGED";
}

json to_json(const ModelLabel& l) {
  return json{{"labeler_id", l.labeler_id},
              {"sample_id", l.sample_id},
              {"stance", to_string(l.stance)},
              {"topic", to_string(l.topic)},
              {"raw_response", l.raw_response}};
}

ModelLabel model_label_from_json(const json& j) {
  return ModelLabel{j.at("labeler_id").get<std::string>(), j.at("sample_id").get<std::string>(),
                    parse_stance(j.at("stance").get<std::string>()),
                    parse_topic(j.at("topic").get<std::string>()),
                    j.value("raw_response", std::string{})};
}

json to_json(const ConsensusResult& c) {
  json j{{"sample_id", c.sample_id}, {"status", to_string(c.status)}};
  j["final_stance"] = c.final_stance ? json(to_string(*c.final_stance)) : json(nullptr);
  j["final_topic"] = c.final_topic ? json(to_string(*c.final_topic)) : json(nullptr);
  return j;
}

}  // namespace stancegen::annotation
