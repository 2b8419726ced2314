// SPDX-License-Identifier: Apache-2.0
#include "stancegen/corpus/text_clean.hpp"

#include <array>
#include <utility>

#include "stancegen/corpus/utf8.hpp"

namespace stancegen::corpus {

namespace {

bool is_ascii_word(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9') ||
         c == U'_';
}

bool is_ascii_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

bool in_strip_set(char32_t c) {
  if (is_unicode_space(c)) return false;
  if (c < 0x20 || c == 0x7F || (c >= 0x80 && c <= 0x9F)) return true;
  switch (c) {
    case U'*': case U'~': case U'^': case U'|': case U'<': case U'>': case U'=':
    case U'`': case U'\\': case U'[': case U']': case U'{': case U'}': case U'#':
    case 0x2022: case 0x00B7:
      return true;
    default:
      return false;
  }
}

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

bool starts_with_ci(const std::u32string& s, std::size_t pos, std::u32string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (ascii_lower(s[pos + k]) != prefix[k]) return false;
  }
  return true;
}

constexpr std::array<std::pair<std::u32string_view, char32_t>, 6> entities{{
    {U"&amp;", U'&'},
    {U"&lt;", U'<'},
    {U"&gt;", U'>'},
    {U"&quot;", U'"'},
    {U"&#39;", U'\''},
    {U"&apos;", U'\''},
}};

// One pass of entity decoding followed by strip-set removal. Returns true if
// anything changed.
bool decode_and_strip(std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == U'&') {
      for (const auto& [name, ch] : entities) {
        if (s.compare(i, name.size(), name) == 0) {
          out.push_back(ch);
          i += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  std::u32string stripped;
  stripped.reserve(out.size());
  for (char32_t c : out) {
    if (!in_strip_set(c)) stripped.push_back(c);
  }
  const bool changed = stripped != s;
  s = std::move(stripped);
  return changed;
}

std::u32string remove_urls(const std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const bool boundary = out.empty() || !is_ascii_word(out.back());
    if (boundary && (starts_with_ci(s, i, U"http://") || starts_with_ci(s, i, U"https://") ||
                     starts_with_ci(s, i, U"www."))) {
      while (i < s.size() && !is_unicode_space(s[i])) ++i;
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::u32string remove_mentions(const std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const bool boundary = out.empty() || !is_ascii_word(out.back());
    if (s[i] == U'@' && boundary && i + 1 < s.size() && is_ascii_word(s[i + 1])) {
      ++i;
      while (i < s.size() && is_ascii_word(s[i])) ++i;
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::u32string collapse_punct_runs(const std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (is_ascii_punct(c) && !out.empty() && out.back() == c) continue;
    out.push_back(c);
  }
  return out;
}

std::u32string collapse_whitespace(const std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char32_t c : s) {
    if (is_unicode_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string clean_text(std::string_view raw) {
  std::u32string s = utf8_decode(raw);
  // Every step only shortens, so the outer loop terminates.
  for (;;) {
    const std::u32string before = s;
    while (decode_and_strip(s)) {
    }
    s = remove_urls(s);
    s = remove_mentions(s);
    s = collapse_punct_runs(s);
    s = collapse_whitespace(s);
    if (s == before) break;
  }
  return utf8_encode(s);
}

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char32_t c : utf8_decode(text)) {
    if (is_unicode_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

bool passes_length_filter(std::string_view text, const LengthBounds& bounds) {
  const std::size_t w = word_count(text);
  return w >= bounds.min_words && w <= bounds.max_words;
}

}  // namespace stancegen::corpus
