#pragma once

// Two-condition comparison and aggregation of visibility improvements.
//
// Scores are normalised to share-of-voice (score / total words of the
// response) before relative improvements are taken, so answers of different
// lengths compare fairly. Outliers are removed with the modified z-score
// 0.6745 * (x - median) / MAD; when MAD is 0 the mean absolute deviation
// variant (x - median) / (1.253314 * meanAD) is used instead.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/visibility/scoring.hpp"

namespace geo::visibility {

enum class ExclusionReason { baseline_zero, outlier, engine_error };

inline std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::baseline_zero: return "baseline_zero";
    case ExclusionReason::outlier: return "outlier";
    case ExclusionReason::engine_error: return "engine_error";
  }
  return "outlier";
}

struct QueryImprovement {
  std::string query_id;
  int target = 0;
  VisibilityScore baseline;
  VisibilityScore treated;
  std::size_t baseline_words = 0;
  std::size_t treated_words = 0;
  double delta_wc = 0.0;      // relative, on normalised scores
  double delta_wc_adj = 0.0;
  std::optional<ExclusionReason> excluded;
};

inline double share(double score, std::size_t total_words) {
  return total_words == 0 ? 0.0 : score / static_cast<double>(total_words);
}

/// Relative improvement of `target`'s visibility from baseline to treated.
inline QueryImprovement compare_conditions(const ParsedResponse& baseline, const ParsedResponse& treated, int target,
                                           std::string query_id = {}) {
  QueryImprovement q;
  q.query_id = std::move(query_id);
  q.target = target;
  q.baseline = score_source(baseline, target);
  q.treated = score_source(treated, target);
  q.baseline_words = baseline.total_words();
  q.treated_words = treated.total_words();
  const double b_wc = share(q.baseline.wc, q.baseline_words), t_wc = share(q.treated.wc, q.treated_words);
  const double b_adj = share(q.baseline.wc_adj, q.baseline_words),
               t_adj = share(q.treated.wc_adj, q.treated_words);
  if (b_wc <= 0.0 || b_adj <= 0.0) {
    q.excluded = ExclusionReason::baseline_zero;
    return q;
  }
  q.delta_wc = (t_wc - b_wc) / b_wc;
  q.delta_wc_adj = (t_adj - b_adj) / b_adj;
  return q;
}

struct OutlierPolicy {
  enum class Kind { none, mad } kind = Kind::mad;
  double threshold = 3.5;

  static OutlierPolicy parse(std::string_view s) {
    if (s == "none") return {Kind::none, 0.0};
    if (s.starts_with("mad")) {
      const auto rest = s.substr(3);
      double t = 3.5;
      if (!rest.empty()) {
        try {
          t = std::stod(std::string(rest));
        } catch (const std::exception&) {
          throw config_error("bad outlier policy '" + std::string(s) + "'");
        }
      }
      return {Kind::mad, t};
    }
    throw config_error("unknown outlier policy '" + std::string(s) + "' (expected mad<threshold> or none)");
  }

  std::string name() const {
    if (kind == Kind::none) return "none";
    char buf[32];
    std::snprintf(buf, sizeof buf, "mad%g", threshold);
    return buf;
  }
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Modified z-scores of `values`.
inline std::vector<double> modified_z_scores(const std::vector<double>& values) {
  std::vector<double> z(values.size(), 0.0);
  if (values.empty()) return z;
  const double med = median(values);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - med);
  const double mad = median(dev);
  double mean_ad = 0.0;
  for (double d : dev) mean_ad += d;
  mean_ad /= static_cast<double>(dev.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mad > 0.0) {
      z[i] = 0.6745 * (values[i] - med) / mad;
    } else if (mean_ad > 0.0) {
      z[i] = (values[i] - med) / (1.253314 * mean_ad);
    }
  }
  return z;
}

struct ImprovementReport {
  std::vector<QueryImprovement> per_query;
  double mean_delta_wc = 0.0;
  double mean_delta_wc_adj = 0.0;
  std::size_t included = 0;
  OutlierPolicy policy;

  std::vector<const QueryImprovement*> excluded() const {
    std::vector<const QueryImprovement*> out;
    for (const auto& q : per_query) {
      if (q.excluded) out.push_back(&q);
    }
    return out;
  }
};

/// Drops outliers (a query is an outlier if either delta is), then averages
/// the surviving relative improvements.
inline ImprovementReport aggregate(std::vector<QueryImprovement> improvements, OutlierPolicy policy = {}) {
  ImprovementReport report;
  report.policy = policy;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < improvements.size(); ++i) {
    if (!improvements[i].excluded) candidates.push_back(i);
  }
  if (policy.kind == OutlierPolicy::Kind::mad && !candidates.empty()) {
    std::vector<double> wc, adj;
    for (auto i : candidates) {
      wc.push_back(improvements[i].delta_wc);
      adj.push_back(improvements[i].delta_wc_adj);
    }
    const auto z_wc = modified_z_scores(wc);
    const auto z_adj = modified_z_scores(adj);
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (std::abs(z_wc[k]) > policy.threshold || std::abs(z_adj[k]) > policy.threshold) {
        improvements[candidates[k]].excluded = ExclusionReason::outlier;
      } else {
        kept.push_back(candidates[k]);
      }
    }
    candidates = std::move(kept);
  }
  report.per_query = std::move(improvements);
  if (candidates.empty()) throw precondition_error("no queries survived exclusion");
  for (auto i : candidates) {
    report.mean_delta_wc += report.per_query[i].delta_wc;
    report.mean_delta_wc_adj += report.per_query[i].delta_wc_adj;
  }
  report.included = candidates.size();
  report.mean_delta_wc /= static_cast<double>(candidates.size());
  report.mean_delta_wc_adj /= static_cast<double>(candidates.size());
  return report;
}

}  // namespace geo::visibility
