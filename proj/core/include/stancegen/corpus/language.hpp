// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace stancegen::corpus {

struct LanguageGuess {
  std::string language;  // ISO 639-1, or "und" when undetermined
  double confidence = 0.0;
};

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual LanguageGuess detect(std::string_view text) const = 0;
};

/// Reference detector with no model files. Splits text into letter runs and
/// counts a word as English-compatible when it is pure ASCII and not a
/// stopword of Spanish, French, German, Italian, Portuguese or Dutch. The
/// English confidence is the compatible fraction; text with no letters is "und".
class LexicalLanguageDetector final : public LanguageDetector {
 public:
  LanguageGuess detect(std::string_view text) const override;
};

inline constexpr double default_language_threshold = 0.9;

/// Throws Error{detector_unavailable} when detector is null.
bool is_english(std::string_view text, const LanguageDetector* detector,
                double threshold = default_language_threshold);

}  // namespace stancegen::corpus
