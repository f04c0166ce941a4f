#pragma once

// Minimal UTF-8 helpers. "Character" throughout the library means a Unicode
// scalar value; invalid bytes count as one character each.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace geo::utf8 {

/// Byte length of the sequence starting with lead byte `c` (1 for invalid leads).
inline std::size_t sequence_length(unsigned char c) noexcept {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

/// Byte offsets of each scalar value start, plus a final entry == s.size().
inline std::vector<std::size_t> char_offsets(std::string_view s) {
  std::vector<std::size_t> out;
  out.reserve(s.size() + 1);
  std::size_t i = 0;
  while (i < s.size()) {
    out.push_back(i);
    std::size_t len = sequence_length(static_cast<unsigned char>(s[i]));
    bool ok = i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      ok = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    }
    i += ok ? len : 1;
  }
  out.push_back(s.size());
  return out;
}

inline std::size_t char_count(std::string_view s) { return char_offsets(s).size() - 1; }

/// Appends the UTF-8 encoding of `cp` to `out`. Surrogates and out-of-range
/// values are replaced with U+FFFD.
inline void append_codepoint(std::string& out, char32_t cp) {
  if ((cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) cp = 0xFFFD;
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

}  // namespace geo::utf8
