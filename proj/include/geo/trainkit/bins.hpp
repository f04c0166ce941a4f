#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "geo/common/error.hpp"

namespace geo::trainkit {

/// k+1 ascending thresholds. Bin i is [edges[i], edges[i+1]); the last bin is
/// closed on the right.
struct LengthBins {
  std::vector<std::size_t> edges;
  /// Set when k exceeds the number of distinct lengths or any bin is empty.
  bool degenerate = false;

  std::size_t bin_count() const { return edges.empty() ? 0 : edges.size() - 1; }

  /// Bin index for `length`. Values outside [front, back] clamp to the end bins.
  std::size_t bin_of(std::size_t length) const {
    const std::size_t k = bin_count();
    // Interior edges are edges[1..k-1]; the bin is how many of them are <= length.
    auto first = edges.begin() + 1;
    auto last = edges.begin() + static_cast<std::ptrdiff_t>(k);
    return static_cast<std::size_t>(std::upper_bound(first, last, length) - first);
  }

  friend bool operator==(const LengthBins&, const LengthBins&) = default;
};

/// Equiprobable bins from empirical order statistics.
///
/// Interior edge j is the order statistic at 0-based rank floor(j*n/k), so
/// with distinct lengths the half-open bins hold floor/ceil(n/k) items each.
inline LengthBins make_length_bins(std::span<const std::size_t> lengths, std::size_t k = 10) {
  if (lengths.empty()) throw precondition_error("make_length_bins: no lengths");
  if (k == 0) throw precondition_error("make_length_bins: k must be >= 1");
  std::vector<std::size_t> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  LengthBins bins;
  bins.edges.reserve(k + 1);
  bins.edges.push_back(sorted.front());
  for (std::size_t j = 1; j < k; ++j) {
    bins.edges.push_back(sorted[std::min(n - 1, j * n / k)]);
  }
  bins.edges.push_back(sorted.back());

  const auto distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  std::vector<std::size_t> population(k, 0);
  for (auto len : lengths) ++population[bins.bin_of(len)];
  bins.degenerate = distinct < k || std::count(population.begin(), population.end(), 0) > 0;
  return bins;
}

}  // namespace geo::trainkit
