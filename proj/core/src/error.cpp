// SPDX-License-Identifier: Apache-2.0
#include "stancegen/error.hpp"

namespace stancegen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::not_found: return "NotFound";
    case ErrorCode::schema_error: return "SchemaError";
    case ErrorCode::detector_unavailable: return "DetectorUnavailable";
    case ErrorCode::no_usable_media: return "NoUsableMedia";
    case ErrorCode::unlabeled_samples: return "UnlabeledSamples";
    case ErrorCode::all_labelers_failed: return "AllLabelersFailed";
    case ErrorCode::insufficient_labels: return "InsufficientLabels";
    case ErrorCode::duplicate_annotator: return "DuplicateAnnotator";
    case ErrorCode::entry_already_resolved: return "EntryAlreadyResolved";
    case ErrorCode::wrong_state: return "WrongState";
    case ErrorCode::annotator_not_independent: return "AnnotatorNotIndependent";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::no_dual_annotations: return "NoDualAnnotations";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::encoder_unavailable: return "EncoderUnavailable";
    case ErrorCode::empty_text: return "EmptyText";
    case ErrorCode::non_finite_gradient: return "NonFiniteGradient";
    case ErrorCode::unknown_template: return "UnknownTemplate";
    case ErrorCode::empty_corpus: return "EmptyCorpus";
    case ErrorCode::invalid_override: return "InvalidOverride";
    case ErrorCode::backend_unavailable: return "BackendUnavailable";
    case ErrorCode::empty_generation: return "EmptyGeneration";
    case ErrorCode::classifier_unavailable: return "ClassifierUnavailable";
    case ErrorCode::scorer_unavailable: return "ScorerUnavailable";
    case ErrorCode::zero_tokens: return "ZeroTokens";
    case ErrorCode::embedder_unavailable: return "EmbedderUnavailable";
    case ErrorCode::image_unreadable: return "ImageUnreadable";
    case ErrorCode::missing_tag: return "MissingTag";
  }
  return "Unknown";
}

}  // namespace stancegen
