#pragma once

#include <cmath>
#include <vector>

#include "geo/common/error.hpp"

namespace geo::textmetrics {

/// Natural-log probabilities of the observed target tokens, one per step.
struct TokenLogProbSeries {
  std::vector<double> logprobs;

  void validate() const {
    if (logprobs.empty()) throw precondition_error("log-probability series is empty");
    for (double lp : logprobs) {
      if (std::isnan(lp) || lp > 0.0) throw precondition_error("log-probability must be <= 0");
      if (std::isinf(lp)) throw precondition_error("log-probability must be finite");
    }
  }
};

/// Mean negative log-likelihood per token (one-hot target distribution).
inline double cross_entropy(const TokenLogProbSeries& series) {
  series.validate();
  double sum = 0.0;
  for (double lp : series.logprobs) sum -= lp;
  return sum / static_cast<double>(series.logprobs.size());
}

inline double perplexity(const TokenLogProbSeries& series) { return std::exp(cross_entropy(series)); }

}  // namespace geo::textmetrics
