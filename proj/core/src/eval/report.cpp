// SPDX-License-Identifier: Apache-2.0
#include "stancegen/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "stancegen/error.hpp"

namespace stancegen::eval {

using nlohmann::json;

std::string to_string(Metric m) {
  switch (m) {
    case Metric::controllability: return "controllability";
    case Metric::cmss: return "cmss";
    case Metric::relevance: return "relevance";
    case Metric::perplexity: return "perplexity";
  }
  return "?";
}

std::string column_title(Metric m) {
  switch (m) {
    case Metric::controllability: return "Controllability ↑";
    case Metric::cmss: return "CMSS ↑";
    case Metric::relevance: return "Relevance ↑";
    case Metric::perplexity: return "Perplexity ↓";
  }
  return "?";
}

bool higher_is_better(Metric m) { return m != Metric::perplexity; }

double MetricValues::get(Metric m) const {
  switch (m) {
    case Metric::controllability: return controllability;
    case Metric::cmss: return cmss;
    case Metric::relevance: return relevance;
    case Metric::perplexity: return perplexity;
  }
  return 0.0;
}

std::string format4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

namespace {

double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  long double s = 0.0L;
  for (const double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

MetricValues reduce(const std::vector<const ItemScores*>& group) {
  MetricValues m;
  m.items = group.size();
  std::size_t hits = 0, tokens = 0;
  std::vector<double> ppl, rel, cm;
  std::vector<long double> lls;
  for (const ItemScores* s : group) {
    hits += s->stance_match ? 1 : 0;
    ppl.push_back(s->perplexity);
    rel.push_back(s->relevance);
    cm.push_back(s->cmss);
    lls.push_back(s->log_likelihood);
    tokens += s->tokens;
  }
  std::sort(lls.begin(), lls.end());
  long double ll = 0.0L;
  for (const long double x : lls) ll += x;
  m.controllability = static_cast<double>(hits) / static_cast<double>(group.size());
  m.perplexity = sorted_mean(ppl);
  m.relevance = sorted_mean(rel);
  m.cmss = sorted_mean(cm);
  m.perplexity_token_weighted =
      tokens ? static_cast<double>(std::exp(-ll / static_cast<long double>(tokens))) : 0.0;
  return m;
}

long long rounded_key(double v) { return std::llround(v * 10000.0); }

double display_value(Metric m, double v, const RenderOptions& o) {
  if (o.clamp_cosine && (m == Metric::cmss || m == Metric::relevance)) return std::clamp(v, 0.0, 1.0);
  return v;
}

std::vector<std::string> column_targets(const MetricReport& r) {
  return r.targets.empty() ? std::vector<std::string>{""} : r.targets;
}

}  // namespace

MetricReport build_report(const std::vector<EvalItem>& items, const std::vector<ItemScores>& scores,
                          bool by_target) {
  if (items.size() != scores.size()) fail(ErrorCode::invalid_argument, "items and scores differ in length");
  if (items.empty()) fail(ErrorCode::empty_input, "report over zero items");
  std::set<std::string> target_set;
  for (const auto& it : items) {
    if (!it.model || it.model->empty()) fail(ErrorCode::missing_tag, "item " + it.item_id + " has no model tag");
    if (!it.modality) fail(ErrorCode::missing_tag, "item " + it.item_id + " has no modality tag");
    if (by_target) {
      if (!it.target || it.target->empty()) fail(ErrorCode::missing_tag, "item " + it.item_id + " has no target tag");
      target_set.insert(*it.target);
    }
  }
  MetricReport r;
  r.targets.assign(target_set.begin(), target_set.end());

  // (modality, model) in first-appearance order, then stable by modality.
  std::vector<std::pair<Modality, std::string>> keys;
  std::map<std::pair<Modality, std::string>, std::map<std::string, std::vector<const ItemScores*>>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto key = std::make_pair(*items[i].modality, *items[i].model);
    if (!groups.count(key)) keys.push_back(key);
    groups[key][by_target ? *items[i].target : std::string()].push_back(&scores[i]);
  }
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& key : keys) {
    ReportRow row{key.first, key.second, {}};
    for (const auto& [target, group] : groups[key]) row.cells[target] = reduce(group);
    r.rows.push_back(std::move(row));
  }
  return r;
}

std::map<std::pair<Metric, std::string>, std::vector<Highlight>> highlights(const MetricReport& r) {
  std::map<std::pair<Metric, std::string>, std::vector<Highlight>> out;
  for (const Metric m : all_metrics) {
    for (const auto& t : column_targets(r)) {
      std::set<long long> distinct;
      for (const auto& row : r.rows) {
        const auto it = row.cells.find(t);
        if (it != row.cells.end()) distinct.insert(rounded_key(it->second.get(m)));
      }
      std::vector<long long> ranked(distinct.begin(), distinct.end());
      if (higher_is_better(m)) std::reverse(ranked.begin(), ranked.end());
      auto& marks = out[{m, t}];
      for (const auto& row : r.rows) {
        const auto it = row.cells.find(t);
        Highlight h = Highlight::none;
        if (it != row.cells.end() && !ranked.empty()) {
          const long long k = rounded_key(it->second.get(m));
          if (k == ranked[0]) {
            h = Highlight::bold;
          } else if (ranked.size() > 1 && k == ranked[1]) {
            h = Highlight::underline;
          }
        }
        marks.push_back(h);
      }
    }
  }
  return out;
}

std::string render_text(const MetricReport& r, const RenderOptions& o) {
  const auto marks = highlights(r);
  const auto targets = column_targets(r);
  const bool split = !r.targets.empty();

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> head{"MODALITY", "MODEL"};
  std::vector<std::string> sub{"", ""};
  for (const Metric m : all_metrics) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      head.push_back(i == 0 ? column_title(m) : "");
      sub.push_back(targets[i]);
    }
  }
  table.push_back(head);
  if (split) table.push_back(sub);
  std::vector<std::size_t> rule_before;  // table indices that start a modality block
  for (std::size_t ri = 0; ri < r.rows.size(); ++ri) {
    const auto& row = r.rows[ri];
    const bool first = ri == 0 || r.rows[ri - 1].modality != row.modality;
    if (first) rule_before.push_back(table.size());
    std::vector<std::string> line{first ? to_string(row.modality) : "", row.model};
    for (const Metric m : all_metrics) {
      for (const auto& t : targets) {
        const auto it = row.cells.find(t);
        if (it == row.cells.end()) {
          line.push_back("-");
          continue;
        }
        std::string v = format4(display_value(m, it->second.get(m), o));
        switch (marks.at({m, t})[ri]) {
          case Highlight::bold: v = "**" + v + "**"; break;
          case Highlight::underline: v = "_" + v + "_"; break;
          case Highlight::none: break;
        }
        line.push_back(v);
      }
    }
    table.push_back(line);
  }

  // Display width: count UTF-8 lead bytes so the arrows line up.
  auto width = [](const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
      return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
  };
  std::vector<std::size_t> w(head.size(), 0);
  for (const auto& line : table)
    for (std::size_t c = 0; c < line.size(); ++c) w[c] = std::max(w[c], width(line[c]));
  std::size_t total = 0;
  for (const auto x : w) total += x + 2;
  const std::string rule(total > 2 ? total - 2 : 0, '-');

  std::ostringstream out;
  out << rule << "\n";
  for (std::size_t li = 0; li < table.size(); ++li) {
    if (std::find(rule_before.begin(), rule_before.end(), li) != rule_before.end()) out << rule << "\n";
    std::string text;
    for (std::size_t c = 0; c < table[li].size(); ++c) {
      const auto& cell = table[li][c];
      text += cell;
      if (c + 1 < table[li].size()) text += std::string(w[c] - width(cell) + 2, ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out << text << "\n";
  }
  out << rule << "\n";
  return out.str();
}

std::string render_csv(const MetricReport& r, const RenderOptions& o) {
  std::ostringstream out;
  out << "modality,model,target,items,controllability,cmss,relevance,perplexity,perplexity_token_weighted\n";
  for (const auto& row : r.rows) {
    for (const auto& [t, v] : row.cells) {
      out << to_string(row.modality) << ',' << row.model << ',' << t << ',' << v.items << ','
          << format4(v.controllability) << ',' << format4(display_value(Metric::cmss, v.cmss, o)) << ','
          << format4(display_value(Metric::relevance, v.relevance, o)) << ',' << format4(v.perplexity)
          << ',' << format4(v.perplexity_token_weighted) << '\n';
    }
  }
  return out.str();
}

json to_json(const MetricReport& r) {
  const auto marks = highlights(r);
  auto round4 = [](double v) { return static_cast<double>(std::llround(v * 10000.0)) / 10000.0; };
  json rows = json::array();
  for (std::size_t ri = 0; ri < r.rows.size(); ++ri) {
    const auto& row = r.rows[ri];
    json cells = json::object();
    for (const auto& [t, v] : row.cells) {
      json metrics, raw, hl;
      for (const Metric m : all_metrics) {
        metrics[to_string(m)] = round4(v.get(m));
        raw[to_string(m)] = v.get(m);
        const Highlight h = marks.at({m, t})[ri];
        hl[to_string(m)] = h == Highlight::bold ? "bold" : h == Highlight::underline ? "underline" : "none";
      }
      raw["perplexity_token_weighted"] = v.perplexity_token_weighted;
      cells[t.empty() ? "all" : t] = {{"items", v.items}, {"metrics", metrics}, {"raw", raw}, {"highlight", hl}};
    }
    rows.push_back({{"modality", to_string(row.modality)}, {"model", row.model}, {"cells", cells}});
  }
  return {{"decimals", 4}, {"targets", r.targets}, {"rows", rows}};
}

}  // namespace stancegen::eval
