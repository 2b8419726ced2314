// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/eval/metrics.hpp"

namespace stancegen::eval {

enum class Metric { controllability, cmss, relevance, perplexity };

inline constexpr std::array<Metric, 4> all_metrics{Metric::controllability, Metric::cmss,
                                                   Metric::relevance, Metric::perplexity};

std::string to_string(Metric m);
std::string column_title(Metric m);  // "Controllability ↑", ..., "Perplexity ↓"
bool higher_is_better(Metric m);

struct MetricValues {
  double controllability = 0.0;
  double cmss = 0.0;
  double relevance = 0.0;
  double perplexity = 0.0;
  double perplexity_token_weighted = 0.0;
  std::size_t items = 0;

  double get(Metric m) const;
};

struct ReportRow {
  Modality modality = Modality::textual;
  std::string model;
  /// Keyed by target ("H", "T"); the single key "" when not split.
  std::map<std::string, MetricValues> cells;
};

struct MetricReport {
  std::vector<std::string> targets;  // empty: no per-target split
  std::vector<ReportRow> rows;       // Textual, Visual, Multi-modal; first appearance within each
};

/// Groups items by (modality, model) and, with `by_target`, by target.
/// Items without a model or modality (or target, when splitting) raise
/// MissingTag. `scores[i]` belongs to `items[i]`.
MetricReport build_report(const std::vector<EvalItem>& items, const std::vector<ItemScores>& scores,
                          bool by_target);

enum class Highlight { none, bold, underline };

/// Per column (metric, target): values are compared after rounding to 4
/// decimals with dense ranking. Every row tied for the best value is bold,
/// every row tied for the next distinct value is underlined. Cells missing
/// from a row stay unhighlighted.
std::map<std::pair<Metric, std::string>, std::vector<Highlight>> highlights(const MetricReport& r);

struct RenderOptions {
  /// Display CMSS and relevance clamped to [0, 1]. Stored values are untouched.
  bool clamp_cosine = false;
};

/// Plain-text table: bold renders as **v**, underline as _v_.
std::string render_text(const MetricReport& r, const RenderOptions& options = {});
/// Long format, one line per (row, target) cell.
std::string render_csv(const MetricReport& r, const RenderOptions& options = {});
nlohmann::json to_json(const MetricReport& r);

/// "0.9257"
std::string format4(double v);

}  // namespace stancegen::eval
