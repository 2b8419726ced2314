// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace stancegen::corpus {

/// Normalizes raw post/comment text. Steps, in order:
///
///   1. Decode UTF-8; invalid byte sequences are dropped.
///   2. Until fixpoint: decode the entities &amp; &lt; &gt; &quot; &#39; &apos;
///      and remove the strip-set:
///        - C0/C1 control characters other than whitespace,
///        - decorative symbols  * ~ ^ | < > = ` \ [ ] { } #  U+2022 U+00B7.
///   3. Remove URLs: a token starting with http://, https:// or www.
///      (case-insensitive) that is not glued to a preceding [A-Za-z0-9_],
///      through to the next whitespace.
///   4. Remove @mentions: '@' not preceded by [A-Za-z0-9_], plus the
///      following run of [A-Za-z0-9_] (at least one).
///   5. Collapse runs of the same ASCII punctuation character to one.
///   6. Collapse whitespace runs to a single space and trim.
///
/// Steps 2-6 repeat until the text stops changing ("http:/@x/y" only becomes a
/// URL once the mention is gone).
/// Sentence punctuation (. , ! ? ' " : ;), emoji and every other character are
/// kept. The function is total and idempotent.
std::string clean_text(std::string_view raw);

/// Number of whitespace-delimited words.
std::size_t word_count(std::string_view text);

struct LengthBounds {
  std::size_t min_words = 10;
  std::size_t max_words = 128;
};

/// True iff min_words <= word_count(text) <= max_words (both inclusive).
bool passes_length_filter(std::string_view text, const LengthBounds& bounds = {});

}  // namespace stancegen::corpus
