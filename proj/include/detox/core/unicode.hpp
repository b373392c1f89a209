#pragma once

// UTF-8 <-> code point helpers backed by ICU character properties.
// All offsets used across the library are code point (Unicode scalar) offsets.

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace detox::unicode {

inline std::u32string decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
  if (error) {
    append_utf8(out, U'\uFFFD');
    return;
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

inline std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) append_utf8(out, c);
  return out;
}

inline std::size_t length(std::string_view utf8) { return decode(utf8).size(); }

inline bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

inline bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)) != 0; }

/// Emoji and pictographic symbols plus the invisible pieces emoji sequences
/// are glued from (ZWJ, variation selectors, skin-tone modifiers, keycaps, tags).
inline bool is_symbol_or_emoji(char32_t c) {
  const auto cp = static_cast<UChar32>(c);
  if (u_charType(cp) == U_OTHER_SYMBOL) return true;
  if (u_hasBinaryProperty(cp, UCHAR_EMOJI_PRESENTATION)) return true;
  if (u_hasBinaryProperty(cp, UCHAR_EMOJI_MODIFIER)) return true;
  if (u_hasBinaryProperty(cp, UCHAR_REGIONAL_INDICATOR)) return true;
  if (c == U'\u200D' || c == U'\uFE0E' || c == U'\uFE0F' || c == U'\u20E3') return true;
  return c >= 0xE0020 && c <= 0xE007F;
}

inline std::u32string to_lower(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t c : text) out.push_back(static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))));
  return out;
}

inline std::string to_lower(std::string_view utf8) { return encode(to_lower(decode(utf8))); }

/// Removes leading and trailing punctuation code points.
inline std::u32string_view strip_punct(std::u32string_view token) {
  while (!token.empty() && is_punct(token.front())) token.remove_prefix(1);
  while (!token.empty() && is_punct(token.back())) token.remove_suffix(1);
  return token;
}

inline std::u32string_view trim(std::u32string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

inline std::string trim(std::string_view utf8) { return encode(trim(std::u32string_view(decode(utf8)))); }

}  // namespace detox::unicode
