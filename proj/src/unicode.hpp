#pragma once

// Minimal UTF-8 handling: enough for Latin, Greek and Cyrillic speaker names
// and debate text. Not a general Unicode implementation.

#include <string>
#include <string_view>

namespace discursive::unicode {

std::u32string decode(std::string_view utf8);
void append_utf8(std::string& out, char32_t cp);
std::string encode(std::u32string_view text);

char32_t fold_case(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);

/// Lower-cased base letters for a code point with diacritics ("é" -> "e",
/// "ß" -> "ss"); empty when the code point has no decomposition here.
std::string_view strip_diacritic(char32_t cp);

std::string fold_case(std::string_view utf8);
/// Case-folds and strips diacritics.
std::string fold_and_strip(std::string_view utf8);

}  // namespace discursive::unicode
