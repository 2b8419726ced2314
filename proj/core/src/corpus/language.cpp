// SPDX-License-Identifier: Apache-2.0
#include "stancegen/corpus/language.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "stancegen/corpus/utf8.hpp"
#include "stancegen/error.hpp"

namespace stancegen::corpus {

namespace {

// Function words that are not also common English words.
constexpr std::string_view foreign_stopwords[] = {
    // es
    "el", "la", "los", "las", "del", "por", "para", "una", "uno", "que", "porque", "pero",
    "como", "muy", "esta", "este", "es", "y", "su", "lo", "mas",
    "ser", "estos", "ella",
    // fr
    "le", "les", "des", "est", "et", "une", "dans", "avec", "sur", "qui", "je", "nous",
    "vous", "cette", "mais", "du", "au", "aux", "ils", "elle", "sont", "leur", "ou",
    // de
    "der", "das", "und", "ist", "nicht", "ein", "eine", "mit", "ich", "wir", "sie", "auf",
    "zu", "auch", "sich", "wird", "noch", "nur",
    // it
    "il", "gli", "della", "di", "che", "sono", "questo", "anche", "perche", "degli",
    // pt
    "os", "da", "das", "dos", "com", "voce", "nao", "uma",
    // nl
    "het", "een", "niet", "maar", "ook", "zijn", "wij"};

bool is_letter(char32_t c) {
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
  if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
  if (c >= 0x370 && c <= 0x1FFF) return true;  // Greek .. Latin Extended Additional
  if (c >= 0x3040 && c <= 0x9FFF) return true;  // Kana, CJK
  return c >= 0xAC00 && c <= 0xD7AF;            // Hangul
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

}  // namespace

LanguageGuess LexicalLanguageDetector::detect(std::string_view text) const {
  const std::u32string cps = utf8_decode(text);
  std::size_t words = 0;
  std::size_t compatible = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_letter(cps[i])) {
      ++i;
      continue;
    }
    std::string ascii;
    bool non_ascii = false;
    while (i < cps.size() &&
           (is_letter(cps[i]) ||
            (is_apostrophe(cps[i]) && i + 1 < cps.size() && is_letter(cps[i + 1])))) {
      const char32_t c = cps[i];
      if (c >= 0x80 && !is_apostrophe(c)) non_ascii = true;
      if (c < 0x80 && !is_apostrophe(c)) {
        ascii.push_back(static_cast<char>(c >= U'A' && c <= U'Z' ? c + 32 : c));
      }
      ++i;
    }
    ++words;
    const bool stop = std::find(std::begin(foreign_stopwords), std::end(foreign_stopwords), ascii) !=
                      std::end(foreign_stopwords);
    if (!non_ascii && !stop) ++compatible;
  }
  if (words == 0) return {"und", 0.0};
  const double confidence = static_cast<double>(compatible) / static_cast<double>(words);
  return {confidence >= 0.5 ? "en" : "und", confidence};
}

bool is_english(std::string_view text, const LanguageDetector* detector, double threshold) {
  if (detector == nullptr) fail(ErrorCode::detector_unavailable, "no language detector configured");
  const LanguageGuess g = detector->detect(text);
  if (g.language == "en") return g.confidence >= threshold;
  return false;
}

}  // namespace stancegen::corpus
