#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/common/text.hpp"

namespace geo::textmetrics {

/// Rules applied when tokenising text for metric comparison.
struct Normalization {
  bool lowercase = true;
  bool strip_punctuation = true;  // leading/trailing ASCII punctuation of each token

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct TokenizedText {
  std::vector<std::string> tokens;
  Normalization normalization;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

inline bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

/// Whitespace split, then the configured normalisation; empty tokens dropped.
inline TokenizedText tokenize(std::string_view text, Normalization norm = {}) {
  TokenizedText out{{}, norm};
  for (auto word : text::split_whitespace(text)) {
    if (norm.strip_punctuation) {
      while (!word.empty() && is_ascii_punct(word.front())) word.remove_prefix(1);
      while (!word.empty() && is_ascii_punct(word.back())) word.remove_suffix(1);
    }
    if (word.empty()) continue;
    out.tokens.push_back(norm.lowercase ? text::ascii_lower(word) : std::string(word));
  }
  return out;
}

inline void require_same_normalization(const TokenizedText& a, const TokenizedText& b) {
  if (!(a.normalization == b.normalization)) {
    throw precondition_error("texts were tokenised under different normalisation rules");
  }
}

}  // namespace geo::textmetrics
