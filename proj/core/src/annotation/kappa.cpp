// SPDX-License-Identifier: Apache-2.0
#include "stancegen/annotation/kappa.hpp"

#include <cstdint>

#include "stancegen/error.hpp"

namespace stancegen::annotation {

ContingencyTable contingency_table(const KappaInput& input) {
  std::map<std::string, std::size_t> index;
  for (const auto& [a, b] : input.pairs) {
    index.emplace(a, 0);
    index.emplace(b, 0);
  }
  std::size_t k = 0;
  for (auto& [label, i] : index) i = k++;
  ContingencyTable t;
  t.counts.assign(k, std::vector<std::size_t>(k, 0));
  for (const auto& [a, b] : input.pairs) ++t.counts[index[a]][index[b]];
  return t;
}

double cohen_kappa(const ContingencyTable& table) {
  const std::size_t k = table.counts.size();
  std::uint64_t n = 0;
  std::uint64_t agree = 0;
  std::vector<std::uint64_t> rows(k, 0);
  std::vector<std::uint64_t> cols(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    if (table.counts[i].size() != k) {
      fail(ErrorCode::invalid_argument, "contingency table must be square");
    }
    for (std::size_t j = 0; j < k; ++j) {
      const std::uint64_t c = table.counts[i][j];
      n += c;
      rows[i] += c;
      cols[j] += c;
      if (i == j) agree += c;
    }
  }
  if (n == 0) fail(ErrorCode::empty_input, "kappa of an empty table");

  // Exact in 64-bit integers while n^2 < 2^63.
  if (n > (std::uint64_t{1} << 31)) fail(ErrorCode::invalid_argument, "kappa table too large");
  std::uint64_t chance = 0;
  for (std::size_t i = 0; i < k; ++i) chance += rows[i] * cols[i];
  const auto num = static_cast<std::int64_t>(n * agree) - static_cast<std::int64_t>(chance);
  const auto den = static_cast<std::int64_t>(n * n) - static_cast<std::int64_t>(chance);
  if (den == 0) return agree == n ? 1.0 : 0.0;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

double cohen_kappa(const KappaInput& input) {
  if (input.pairs.empty()) fail(ErrorCode::empty_input, "kappa needs at least one pair");
  return cohen_kappa(contingency_table(input));
}

AgreementReport compute_agreement_report(const std::vector<AnnotationRecord>& records,
                                         const std::set<AgreementDimension>& dimensions) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const AnnotationRecord*>> by_sample;
  for (const auto& r : records) {
    auto& list = by_sample[r.sample_id];
    if (list.empty()) order.push_back(r.sample_id);
    list.push_back(&r);
  }
  KappaInput stance;
  KappaInput topic;
  for (const auto& id : order) {
    const auto& list = by_sample[id];
    if (list.size() < 2) continue;
    const AnnotationRecord& a = *list[0];
    const AnnotationRecord& b = *list[1];
    stance.pairs.emplace_back(to_string(a.stance), to_string(b.stance));
    topic.pairs.emplace_back(to_string(a.topic), to_string(b.topic));
  }
  if (stance.pairs.empty()) {
    fail(ErrorCode::no_dual_annotations, "no sample has two human annotations");
  }
  AgreementReport report;
  report.items = stance.pairs.size();
  double sum = 0.0;
  if (dimensions.contains(AgreementDimension::stance)) {
    sum += report.kappa["stance"] = cohen_kappa(stance);
  }
  if (dimensions.contains(AgreementDimension::topic)) {
    sum += report.kappa["topic"] = cohen_kappa(topic);
  }
  if (!report.kappa.empty()) report.average = sum / static_cast<double>(report.kappa.size());
  return report;
}

nlohmann::json to_json(const AgreementReport& r) {
  return nlohmann::json{{"kappa", r.kappa}, {"average", r.average}, {"items", r.items}};
}

}  // namespace stancegen::annotation
