// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/annotation/labelers.hpp"

namespace stancegen::annotation {

enum class QueueState { awaiting_first, awaiting_second, needs_third, resolved };

std::string_view to_string(QueueState s);
std::optional<QueueState> try_parse_queue_state(std::string_view s);

struct AnnotationRecord {
  std::string annotator_id;
  std::string sample_id;
  Stance stance = Stance::favor;
  Topic topic = Topic::other;
  std::optional<Style> style;
  std::string timestamp;  // ISO-8601 UTC, supplied by the caller

  bool operator==(const AnnotationRecord&) const = default;
};

struct FinalLabel {
  Stance stance = Stance::favor;
  Topic topic = Topic::other;
  std::optional<Style> style;
  /// True when two agreeing annotators disagreed on topic; the first
  /// annotator's topic is kept.
  bool topic_disputed = false;

  bool operator==(const FinalLabel&) const = default;
};

/// What the adjudicator sees about the sample.
struct EntryContext {
  std::string post_text;
  std::string image_uri;
  std::string comment_text;

  bool operator==(const EntryContext&) const = default;
};

struct QueueEntry {
  std::string sample_id;
  std::uint64_t enqueued_seq = 0;
  EntryContext context;
  std::vector<ModelLabel> model_labels;
  std::vector<AnnotationRecord> human_labels;  // at most 3
  QueueState state = QueueState::awaiting_first;
  std::optional<FinalLabel> final_label;

  bool operator==(const QueueEntry&) const = default;
};

/// AWAITING_FIRST -> AWAITING_SECOND -> RESOLVED (first two agree on stance)
///                                   -> NEEDS_THIRD (otherwise).
/// Errors: EntryAlreadyResolved, WrongState (entry needs a third annotator),
/// DuplicateAnnotator.
QueueEntry record_human_label(QueueEntry entry, const AnnotationRecord& record);

/// NEEDS_THIRD -> RESOLVED with the third annotator's label as final, whatever
/// the first two said. Errors: WrongState, AnnotatorNotIndependent.
QueueEntry resolve_with_third(QueueEntry entry, const AnnotationRecord& record);

/// record_human_label or resolve_with_third depending on the entry's state.
QueueEntry apply_human_label(QueueEntry entry, const AnnotationRecord& record);

enum class EventType { enqueue, label };

struct QueueEvent {
  std::uint64_t seq = 0;
  EventType type = EventType::enqueue;
  std::string sample_id;
  // enqueue
  EntryContext context;
  std::vector<ModelLabel> model_labels;
  // label
  std::optional<AnnotationRecord> record;
};

nlohmann::json to_json(const AnnotationRecord& r);
AnnotationRecord annotation_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FinalLabel& f);
nlohmann::json to_json(const QueueEntry& e);
nlohmann::json to_json(const QueueEvent& e);
QueueEvent queue_event_from_json(const nlohmann::json& j);

/// Event-sourced queue. Every accepted change is appended to the event log
/// (and to the log file when one is attached); state is a pure fold over the
/// log. Writes are serialized; readers get copies.
class AnnotationQueue {
 public:
  AnnotationQueue() = default;
  AnnotationQueue(AnnotationQueue&& other) noexcept;
  AnnotationQueue& operator=(AnnotationQueue&&) = delete;

  /// Replays an existing log file (if present) and appends to it afterwards.
  explicit AnnotationQueue(std::filesystem::path log_path);

  static AnnotationQueue replay(const std::vector<QueueEvent>& events);

  /// Adds a flagged sample. Re-enqueueing an existing sample is an error.
  void enqueue(const std::string& sample_id, const EntryContext& context,
               const std::vector<ModelLabel>& model_labels);

  /// Applies a human label, persists the event and returns the new entry.
  QueueEntry submit(const AnnotationRecord& record);

  std::optional<QueueEntry> entry(const std::string& sample_id) const;

  /// Oldest first, optionally filtered by state.
  std::vector<QueueEntry> entries(std::optional<QueueState> state = std::nullopt) const;

  std::vector<QueueEvent> events() const;

  /// Every human record across entries, in event order.
  std::vector<AnnotationRecord> human_records() const;

  /// Canonical JSON of all entries keyed by sample id.
  nlohmann::json snapshot() const;
  void write_snapshot(const std::filesystem::path& path) const;

 private:
  void apply(const QueueEvent& event);
  void append(QueueEvent event);

  mutable std::shared_mutex mutex_;
  std::map<std::string, QueueEntry> entries_;
  std::vector<QueueEvent> events_;
  std::optional<std::filesystem::path> log_path_;
};

}  // namespace stancegen::annotation
