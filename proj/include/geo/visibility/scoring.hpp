#pragma once

#include <cstddef>

#include "geo/common/error.hpp"
#include "geo/visibility/parse.hpp"

namespace geo::visibility {

struct VisibilityScore {
  int source_index = 0;
  double wc = 0.0;
  double wc_adj = 0.0;
};

/// Absolute word count: total words of the sentences citing `source`.
inline double word_count_metric(const ParsedResponse& parsed, int source) {
  std::size_t sum = 0;
  for (const auto& s : parsed.sentences) {
    if (s.citations.contains(source)) sum += s.word_count;
  }
  return static_cast<double>(sum);
}

/// Position-adjusted word count: each citing sentence weighted by
/// 1 - pos/|S| with 0-based pos, so the first sentence has weight 1 and the
/// last 1/|S|.
inline double adjusted_word_count_metric(const ParsedResponse& parsed, int source) {
  if (parsed.total() == 0) throw precondition_error("adjusted word count of an empty response");
  const double total = static_cast<double>(parsed.total());
  double sum = 0.0;
  for (const auto& s : parsed.sentences) {
    if (s.citations.contains(source)) {
      sum += static_cast<double>(s.word_count) * (1.0 - static_cast<double>(s.pos) / total);
    }
  }
  return sum;
}

inline VisibilityScore score_source(const ParsedResponse& parsed, int source) {
  VisibilityScore v{source, word_count_metric(parsed, source), 0.0};
  v.wc_adj = parsed.total() == 0 ? 0.0 : adjusted_word_count_metric(parsed, source);
  return v;
}

}  // namespace geo::visibility
