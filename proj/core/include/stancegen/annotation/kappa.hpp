// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/annotation/queue.hpp"

namespace stancegen::annotation {

/// Paired categorical judgements (annotator A, annotator B) for the same items.
struct KappaInput {
  std::vector<std::pair<std::string, std::string>> pairs;
};

/// Square table; counts[i][j] = items A put in class i and B in class j.
struct ContingencyTable {
  std::vector<std::vector<std::size_t>> counts;
};

ContingencyTable contingency_table(const KappaInput& input);

/// Cohen's kappa, (p_o - p_e) / (1 - p_e), evaluated in integer form
///   (n * agree - sum_k r_k c_k) / (n^2 - sum_k r_k c_k)
/// so the only rounding is the final division. When p_e = 1 (both sides use
/// one and the same single class) the ratio is 0/0; the result is then 1 if
/// p_o = 1 and 0 otherwise. Throws Error{empty_input} on an empty input.
double cohen_kappa(const KappaInput& input);
double cohen_kappa(const ContingencyTable& table);

enum class AgreementDimension { stance, topic };

struct AgreementReport {
  std::map<std::string, double> kappa;  // "stance", "topic"
  double average = 0.0;
  std::size_t items = 0;  // dually annotated samples
};

/// Kappa between the first two annotators of every sample that has at least
/// two records, per requested dimension, plus their mean. Records are taken
/// in the given order. Throws Error{no_dual_annotations} if no sample has two.
AgreementReport compute_agreement_report(
    const std::vector<AnnotationRecord>& records,
    const std::set<AgreementDimension>& dimensions = {AgreementDimension::stance,
                                                      AgreementDimension::topic});

nlohmann::json to_json(const AgreementReport& r);

}  // namespace stancegen::annotation
