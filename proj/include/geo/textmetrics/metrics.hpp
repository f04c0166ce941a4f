#pragma once

#include <optional>
#include <string_view>

#include "geo/textmetrics/likelihood.hpp"
#include "geo/textmetrics/overlap.hpp"
#include "geo/textmetrics/tokenize.hpp"

namespace geo::textmetrics {

struct MetricReport {
  double rouge_l = 0.0;
  double bleu = 0.0;
  double length_ratio = 0.0;
  std::optional<double> perplexity;
};

inline MetricReport evaluate(std::string_view candidate, std::string_view reference,
                             const TokenLogProbSeries* series = nullptr, Normalization norm = {}) {
  const auto c = tokenize(candidate, norm);
  const auto r = tokenize(reference, norm);
  MetricReport m;
  m.rouge_l = rouge_l(c, r).f1;
  m.bleu = bleu(c, r);
  m.length_ratio = length_ratio(c, r);
  if (series) m.perplexity = perplexity(*series);
  return m;
}

}  // namespace geo::textmetrics
