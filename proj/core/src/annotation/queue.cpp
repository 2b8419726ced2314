// SPDX-License-Identifier: Apache-2.0
#include "stancegen/annotation/queue.hpp"

#include <algorithm>
#include <fstream>

#include "stancegen/error.hpp"
#include "stancegen/util/jsonl.hpp"

namespace stancegen::annotation {

using nlohmann::json;

std::string_view to_string(QueueState s) {
  switch (s) {
    case QueueState::awaiting_first: return "AWAITING_FIRST";
    case QueueState::awaiting_second: return "AWAITING_SECOND";
    case QueueState::needs_third: return "NEEDS_THIRD";
    case QueueState::resolved: return "RESOLVED";
  }
  return "AWAITING_FIRST";
}

std::optional<QueueState> try_parse_queue_state(std::string_view s) {
  for (auto st : {QueueState::awaiting_first, QueueState::awaiting_second,
                  QueueState::needs_third, QueueState::resolved}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

namespace {

bool has_annotator(const QueueEntry& entry, const std::string& annotator) {
  return std::any_of(entry.human_labels.begin(), entry.human_labels.end(),
                     [&](const AnnotationRecord& r) { return r.annotator_id == annotator; });
}

void check_record(const QueueEntry& entry, const AnnotationRecord& record) {
  if (record.sample_id != entry.sample_id) {
    fail(ErrorCode::invalid_argument,
         "record for " + record.sample_id + " applied to entry " + entry.sample_id);
  }
  if (record.annotator_id.empty()) fail(ErrorCode::invalid_argument, "annotator_id is empty");
}

}  // namespace

QueueEntry record_human_label(QueueEntry entry, const AnnotationRecord& record) {
  check_record(entry, record);
  if (entry.state == QueueState::resolved) {
    fail(ErrorCode::entry_already_resolved, "entry " + entry.sample_id + " is resolved");
  }
  if (entry.state == QueueState::needs_third) {
    fail(ErrorCode::wrong_state, "entry " + entry.sample_id + " needs a third annotator");
  }
  if (has_annotator(entry, record.annotator_id)) {
    fail(ErrorCode::duplicate_annotator,
         record.annotator_id + " already labeled " + entry.sample_id);
  }
  entry.human_labels.push_back(record);
  if (entry.state == QueueState::awaiting_first) {
    entry.state = QueueState::awaiting_second;
    return entry;
  }
  const AnnotationRecord& first = entry.human_labels[0];
  const AnnotationRecord& second = entry.human_labels[1];
  if (first.stance == second.stance) {
    entry.state = QueueState::resolved;
    entry.final_label = FinalLabel{first.stance, first.topic,
                                   first.style ? first.style : second.style,
                                   first.topic != second.topic};
  } else {
    entry.state = QueueState::needs_third;
  }
  return entry;
}

QueueEntry resolve_with_third(QueueEntry entry, const AnnotationRecord& record) {
  check_record(entry, record);
  if (entry.state != QueueState::needs_third) {
    fail(ErrorCode::wrong_state, "entry " + entry.sample_id + " is " +
                                     std::string(to_string(entry.state)) + ", not NEEDS_THIRD");
  }
  if (has_annotator(entry, record.annotator_id)) {
    fail(ErrorCode::annotator_not_independent,
         record.annotator_id + " was one of the first two annotators of " + entry.sample_id);
  }
  entry.human_labels.push_back(record);
  entry.state = QueueState::resolved;
  entry.final_label = FinalLabel{record.stance, record.topic, record.style, false};
  return entry;
}

QueueEntry apply_human_label(QueueEntry entry, const AnnotationRecord& record) {
  if (entry.state == QueueState::needs_third) return resolve_with_third(std::move(entry), record);
  return record_human_label(std::move(entry), record);
}

// --- JSON ------------------------------------------------------------------

json to_json(const AnnotationRecord& r) {
  json j{{"annotator_id", r.annotator_id},
         {"sample_id", r.sample_id},
         {"stance", to_string(r.stance)},
         {"topic", to_string(r.topic)},
         {"timestamp", r.timestamp}};
  j["style"] = r.style ? json(to_string(*r.style)) : json(nullptr);
  return j;
}

AnnotationRecord annotation_record_from_json(const json& j) {
  AnnotationRecord r;
  r.annotator_id = j.at("annotator_id").get<std::string>();
  r.sample_id = j.at("sample_id").get<std::string>();
  r.stance = parse_stance(j.at("stance").get<std::string>());
  r.topic = parse_topic(j.at("topic").get<std::string>());
  if (j.contains("style") && !j["style"].is_null()) {
    r.style = parse_style(j["style"].get<std::string>());
  }
  r.timestamp = j.value("timestamp", std::string{});
  return r;
}

json to_json(const FinalLabel& f) {
  json j{{"stance", to_string(f.stance)},
         {"topic", to_string(f.topic)},
         {"topic_disputed", f.topic_disputed}};
  j["style"] = f.style ? json(to_string(*f.style)) : json(nullptr);
  return j;
}

namespace {

json context_json(const EntryContext& c) {
  return json{{"post_text", c.post_text},
              {"image_uri", c.image_uri},
              {"comment_text", c.comment_text}};
}

EntryContext context_from_json(const json& j) {
  return EntryContext{j.value("post_text", std::string{}), j.value("image_uri", std::string{}),
                      j.value("comment_text", std::string{})};
}

}  // namespace

json to_json(const QueueEntry& e) {
  json models = json::array();
  for (const auto& m : e.model_labels) models.push_back(to_json(m));
  json humans = json::array();
  for (const auto& h : e.human_labels) humans.push_back(to_json(h));
  json j{{"sample_id", e.sample_id},
         {"enqueued_seq", e.enqueued_seq},
         {"context", context_json(e.context)},
         {"model_labels", models},
         {"human_labels", humans},
         {"state", to_string(e.state)}};
  j["final_label"] = e.final_label ? to_json(*e.final_label) : json(nullptr);
  return j;
}

json to_json(const QueueEvent& e) {
  json j{{"seq", e.seq}, {"sample_id", e.sample_id}};
  if (e.type == EventType::enqueue) {
    j["type"] = "enqueue";
    j["context"] = context_json(e.context);
    json models = json::array();
    for (const auto& m : e.model_labels) models.push_back(to_json(m));
    j["model_labels"] = models;
  } else {
    j["type"] = "label";
    j["record"] = to_json(*e.record);
  }
  return j;
}

QueueEvent queue_event_from_json(const json& j) {
  QueueEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.sample_id = j.at("sample_id").get<std::string>();
  const auto type = j.at("type").get<std::string>();
  if (type == "enqueue") {
    e.type = EventType::enqueue;
    e.context = context_from_json(j.value("context", json::object()));
    for (const auto& m : j.value("model_labels", json::array())) {
      e.model_labels.push_back(model_label_from_json(m));
    }
  } else if (type == "label") {
    e.type = EventType::label;
    e.record = annotation_record_from_json(j.at("record"));
  } else {
    fail(ErrorCode::schema_error, "unknown event type " + type);
  }
  return e;
}

// --- AnnotationQueue --------------------------------------------------------

AnnotationQueue::AnnotationQueue(std::filesystem::path log_path) {
  if (std::filesystem::exists(log_path)) {
    util::for_each_jsonl(log_path, [&](const json& j, std::size_t) {
      QueueEvent e = queue_event_from_json(j);
      apply(e);
      events_.push_back(std::move(e));
    });
  }
  log_path_ = std::move(log_path);
}

AnnotationQueue::AnnotationQueue(AnnotationQueue&& other) noexcept {
  std::unique_lock lock(other.mutex_);
  entries_ = std::move(other.entries_);
  events_ = std::move(other.events_);
  log_path_ = std::move(other.log_path_);
}

AnnotationQueue AnnotationQueue::replay(const std::vector<QueueEvent>& events) {
  AnnotationQueue q;
  for (const auto& e : events) {
    q.apply(e);
    q.events_.push_back(e);
  }
  return q;
}

void AnnotationQueue::apply(const QueueEvent& event) {
  if (event.type == EventType::enqueue) {
    if (entries_.contains(event.sample_id)) {
      fail(ErrorCode::invalid_argument, "sample " + event.sample_id + " is already queued");
    }
    QueueEntry entry;
    entry.sample_id = event.sample_id;
    entry.enqueued_seq = event.seq;
    entry.context = event.context;
    entry.model_labels = event.model_labels;
    entries_.emplace(event.sample_id, std::move(entry));
    return;
  }
  const auto it = entries_.find(event.sample_id);
  if (it == entries_.end()) fail(ErrorCode::not_found, "no queue entry " + event.sample_id);
  it->second = apply_human_label(it->second, *event.record);
}

void AnnotationQueue::append(QueueEvent event) {
  event.seq = events_.size() + 1;
  apply(event);
  if (log_path_) {
    std::ofstream out(*log_path_, std::ios::app | std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot append to " + log_path_->string());
    out << to_json(event).dump() << '\n';
  }
  events_.push_back(std::move(event));
}

void AnnotationQueue::enqueue(const std::string& sample_id, const EntryContext& context,
                              const std::vector<ModelLabel>& model_labels) {
  std::unique_lock lock(mutex_);
  QueueEvent e;
  e.type = EventType::enqueue;
  e.sample_id = sample_id;
  e.context = context;
  e.model_labels = model_labels;
  append(std::move(e));
}

QueueEntry AnnotationQueue::submit(const AnnotationRecord& record) {
  std::unique_lock lock(mutex_);
  QueueEvent e;
  e.type = EventType::label;
  e.sample_id = record.sample_id;
  e.record = record;
  append(std::move(e));
  return entries_.at(record.sample_id);
}

std::optional<QueueEntry> AnnotationQueue::entry(const std::string& sample_id) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(sample_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<QueueEntry> AnnotationQueue::entries(std::optional<QueueState> state) const {
  std::shared_lock lock(mutex_);
  std::vector<QueueEntry> out;
  for (const auto& [id, e] : entries_) {
    if (!state || e.state == *state) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const QueueEntry& a, const QueueEntry& b) {
    return a.enqueued_seq < b.enqueued_seq;
  });
  return out;
}

std::vector<QueueEvent> AnnotationQueue::events() const {
  std::shared_lock lock(mutex_);
  return events_;
}

std::vector<AnnotationRecord> AnnotationQueue::human_records() const {
  std::shared_lock lock(mutex_);
  std::vector<AnnotationRecord> out;
  for (const auto& e : events_) {
    if (e.type == EventType::label) out.push_back(*e.record);
  }
  return out;
}

json AnnotationQueue::snapshot() const {
  std::shared_lock lock(mutex_);
  json j = json::object();
  for (const auto& [id, e] : entries_) j[id] = to_json(e);
  return j;
}

void AnnotationQueue::write_snapshot(const std::filesystem::path& path) const {
  util::write_json(path, snapshot());
}

}  // namespace stancegen::annotation
