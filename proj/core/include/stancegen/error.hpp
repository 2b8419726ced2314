// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stancegen {

enum class ErrorCode {
  invalid_argument,
  config_error,
  io_error,
  not_found,
  // corpus
  schema_error,
  detector_unavailable,
  no_usable_media,
  unlabeled_samples,
  // annotation
  all_labelers_failed,
  insufficient_labels,
  duplicate_annotator,
  entry_already_resolved,
  wrong_state,
  annotator_not_independent,
  empty_input,
  no_dual_annotations,
  // sdmg
  dimension_mismatch,
  encoder_unavailable,
  empty_text,
  non_finite_gradient,
  // generation
  unknown_template,
  empty_corpus,
  invalid_override,
  backend_unavailable,
  empty_generation,
  // eval
  classifier_unavailable,
  scorer_unavailable,
  zero_tokens,
  embedder_unavailable,
  image_unreadable,
  missing_tag,
};

/// Stable CamelCase name, used in structured error bodies and reject logs.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace stancegen
