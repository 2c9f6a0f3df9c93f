#pragma once

#include <string>

namespace startext {

// Decodes UTF-8, throwing ValidationError on malformed input (overlong
// forms, surrogates, truncated sequences, out-of-range scalars).
std::u32string utf8_decode(const std::string& s);

std::string utf8_encode(const std::u32string& s);
std::string utf8_encode(char32_t cp);

}  // namespace startext
