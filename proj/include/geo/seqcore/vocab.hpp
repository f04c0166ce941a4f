#pragma once

// Word-level vocabulary. Subword (BPE) training is deliberately not
// implemented; the seqcore checks concern layer math, not subword statistics.

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/common/text.hpp"
#include "geo/seqcore/dims.hpp"

namespace geo::seqcore {

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBegin = 1;
  static constexpr TokenId kEnd = 2;
  static constexpr TokenId kMask = 3;
  static constexpr TokenId kUnknown = 4;

  Vocab() {
    for (const char* s : {"<pad>", "<s>", "</s>", "<mask>", "<unk>"}) add(s);
  }

  /// Specials first, then words with count >= min_count by descending
  /// frequency (ties lexicographic).
  static Vocab build(const std::vector<std::string>& texts, std::size_t min_count = 1) {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : texts) {
      for (auto w : text::split_whitespace(t)) ++counts[std::string(w)];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocab v;
    for (const auto& [word, count] : ranked) {
      if (count >= min_count && !v.index_.contains(word)) v.add(word);
    }
    return v;
  }

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw precondition_error("token id out of range");
    return tokens_[static_cast<std::size_t>(id)];
  }
  TokenId id(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? kUnknown : it->second;
  }

  std::vector<TokenId> encode(std::string_view text) const {
    std::vector<TokenId> ids;
    for (auto w : text::split_whitespace(text)) ids.push_back(id(w));
    return ids;
  }

  std::string decode(const std::vector<TokenId>& ids) const {
    std::vector<std::string> words;
    for (auto i : ids) words.push_back(token(i));
    return text::join(words, " ");
  }

 private:
  void add(std::string word) {
    index_.emplace(word, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(std::move(word));
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace geo::seqcore
