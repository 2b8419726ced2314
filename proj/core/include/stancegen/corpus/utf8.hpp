// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace stancegen::corpus {

/// Decodes UTF-8, silently dropping malformed, overlong and surrogate sequences.
std::u32string utf8_decode(std::string_view bytes);
std::string utf8_encode(std::u32string_view cps);

bool is_unicode_space(char32_t c);

}  // namespace stancegen::corpus
