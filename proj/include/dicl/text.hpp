#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dicl {

namespace detail {

// Decodes one UTF-8 codepoint starting at `i`; advances `i` past it.
// Invalid bytes decode as 0xFFFD one byte at a time.
inline char32_t next_codepoint(std::string_view s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int j = 1; j < len; ++j) {
    unsigned char bj = static_cast<unsigned char>(s[i + j]);
    if ((bj & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (bj & 0x3F);
  }
  i += len;
  return cp;
}

inline bool is_unicode_space(char32_t cp) {
  return cp == 0x85 || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

// Common punctuation blocks outside ASCII. Not exhaustive for all of
// Unicode, but covers the general-punctuation block plus Latin-1 and
// CJK marks seen in the supported datasets.
inline bool is_unicode_punct(char32_t cp) {
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  if (cp >= 0x2010 && cp <= 0x2027) return true;   // dashes, quotes, bullets
  if (cp >= 0x2030 && cp <= 0x205E) return true;   // permille .. misc punctuation
  if (cp >= 0x3001 && cp <= 0x3003) return true;   // CJK comma, stop
  if (cp >= 0x3008 && cp <= 0x3011) return true;   // CJK brackets
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;   // fullwidth ! .. /
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;   // fullwidth : .. @
  if (cp >= 0xFF3B && cp <= 0xFF40) return true;   // fullwidth [ .. `
  if (cp >= 0xFF5B && cp <= 0xFF65) return true;   // fullwidth { .. halfwidth dot
  return false;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace detail

/// Lowercased word tokens: splits on whitespace and punctuation, drops the
/// separators, keeps everything else. No stemming, no stopword removal.
/// Lowercasing applies to ASCII letters; other scripts pass through.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = detail::next_codepoint(text, i);
    bool separator;
    if (cp < 0x80) {
      separator = !((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
                    (cp >= '0' && cp <= '9'));
      if (cp >= 'A' && cp <= 'Z') cp = cp - 'A' + 'a';
    } else {
      separator = cp == 0xFFFD || detail::is_unicode_space(cp) || detail::is_unicode_punct(cp);
    }
    if (separator) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      detail::append_utf8(current, cp);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace dicl
