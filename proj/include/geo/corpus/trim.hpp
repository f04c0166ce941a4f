#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "geo/common/error.hpp"
#include "geo/common/text.hpp"
#include "geo/common/utf8.hpp"

namespace geo::corpus {

inline constexpr std::size_t kMaxChars = 4000;

/// Shortens `text` to at most `limit` characters (Unicode scalar values).
///
/// Cuts after the last sentence terminator ('.', '!', '?' followed by
/// whitespace or end of text) that fits; failing that, at the last whitespace
/// before the limit; failing that, hard at `limit` characters.
inline std::string trim_content(std::string_view text, std::size_t limit = kMaxChars) {
  if (limit == 0) throw precondition_error("trim limit must be >= 1");
  const auto offsets = utf8::char_offsets(text);
  const std::size_t chars = offsets.size() - 1;
  if (chars <= limit) return std::string(text);

  // Byte offset one past the last character allowed in the output.
  const std::size_t cap = offsets[limit];
  std::size_t best = std::string_view::npos;
  for (std::size_t end = cap; end >= 1; --end) {
    const char c = text[end - 1];
    if ((c == '.' || c == '!' || c == '?') && (end == text.size() || text::is_space(text[end]))) {
      best = end;
      break;
    }
  }
  if (best != std::string_view::npos) return std::string(text.substr(0, best));

  for (std::size_t pos = cap; pos-- > 0;) {
    if (text::is_space(text[pos])) {
      std::string_view head = text.substr(0, pos);
      while (!head.empty() && text::is_space(head.back())) head.remove_suffix(1);
      return std::string(head);
    }
  }
  return std::string(text.substr(0, cap));
}

}  // namespace geo::corpus
