#pragma once

// Sequence-overlap metrics: LCS, ROUGE-L, sentence-level BLEU, length ratio.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/textmetrics/tokenize.hpp"

namespace geo::textmetrics {

/// Longest common subsequence length. O(|a|*|b|) time, O(min) memory.
template <typename T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

inline std::size_t lcs_length(const TokenizedText& a, const TokenizedText& b) {
  require_same_normalization(a, b);
  return lcs_length<std::string>(a.tokens, b.tokens);
}

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline RougeL rouge_l(const TokenizedText& candidate, const TokenizedText& reference) {
  if (reference.empty()) throw precondition_error("rouge_l: empty reference");
  require_same_normalization(candidate, reference);
  if (candidate.empty()) return {};
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  RougeL r;
  r.precision = lcs / static_cast<double>(candidate.size());
  r.recall = lcs / static_cast<double>(reference.size());
  r.f1 = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

template <typename T>
std::map<std::vector<T>, std::size_t> ngram_counts(std::span<const T> tokens, std::size_t n) {
  std::map<std::vector<T>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<T>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                            tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

/// Clipped n-gram precision as (matches, total candidate n-grams).
template <typename T>
std::pair<std::size_t, std::size_t> clipped_precision(std::span<const T> candidate, std::span<const T> reference,
                                                      std::size_t n) {
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  std::size_t matches = 0, total = 0;
  for (const auto& [gram, count] : cand) {
    total += count;
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return {matches, total};
}

/// Sentence-level, single-reference BLEU without smoothing: any n-gram order
/// with zero matches (or no candidate n-grams) makes the score 0.
inline double bleu(const TokenizedText& candidate, const TokenizedText& reference, std::size_t max_n = 4) {
  if (reference.empty()) throw precondition_error("bleu: empty reference");
  if (max_n == 0) throw precondition_error("bleu: max_n must be >= 1");
  require_same_normalization(candidate, reference);
  if (candidate.empty()) return 0.0;
  std::span<const std::string> c(candidate.tokens), r(reference.tokens);
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto [matches, total] = clipped_precision(c, r, n);
    if (matches == 0 || total == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches) / static_cast<double>(total));
  }
  const double cl = static_cast<double>(c.size()), rl = static_cast<double>(r.size());
  const double bp = cl > rl ? 1.0 : std::exp(1.0 - rl / cl);
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

inline double length_ratio(const TokenizedText& candidate, const TokenizedText& reference) {
  if (reference.empty()) throw precondition_error("length_ratio: empty reference");
  return static_cast<double>(candidate.size()) / static_cast<double>(reference.size());
}

}  // namespace geo::textmetrics
