#pragma once

// Add-k smoothed unigram model. The unknown token is one extra type with
// count 0, so p(t) = (c(t) + k) / (N + k (V + 1)) and the distribution sums
// to 1 over the vocabulary plus the unknown token.

#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/textmetrics/likelihood.hpp"
#include "geo/textmetrics/tokenize.hpp"

namespace geo::harness {

struct UnigramLm {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  double k = 1.0;
  textmetrics::Normalization normalization;

  std::size_t vocab_size() const { return counts.size(); }

  double denominator() const {
    return static_cast<double>(total) + k * static_cast<double>(vocab_size() + 1);
  }

  double probability(const std::string& token) const {
    auto it = counts.find(token);
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    return (c + k) / denominator();
  }

  double unknown_probability() const { return k / denominator(); }
};

inline UnigramLm fit_unigram(const std::vector<std::string>& texts, double k = 1.0,
                             textmetrics::Normalization norm = {}) {
  if (texts.empty()) throw precondition_error("fit_unigram: no training texts");
  if (k < 0.0) throw precondition_error("fit_unigram: smoothing constant must be >= 0");
  UnigramLm lm;
  lm.k = k;
  lm.normalization = norm;
  for (const auto& t : texts) {
    for (auto& tok : textmetrics::tokenize(t, norm).tokens) {
      ++lm.counts[tok];
      ++lm.total;
    }
  }
  if (lm.total == 0) throw precondition_error("fit_unigram: training texts contain no tokens");
  return lm;
}

/// Log-probability of every token of `text`. With k = 0 an unseen token has
/// probability 0 and the series fails validation downstream.
inline textmetrics::TokenLogProbSeries score_text(const UnigramLm& lm, std::string_view text) {
  textmetrics::TokenLogProbSeries series;
  for (const auto& tok : textmetrics::tokenize(text, lm.normalization).tokens) {
    series.logprobs.push_back(std::log(lm.probability(tok)));
  }
  return series;
}

}  // namespace geo::harness
