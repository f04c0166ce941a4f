#pragma once

// Human-readable (Markdown) and machine-readable (JSON) run reports. Output
// depends only on the inputs passed in, so re-emission is byte-identical.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "geo/harness/config.hpp"

namespace geo::harness {

struct ArtifactRef {
  std::string path;
  std::string digest;
};

struct ReportInputs {
  KeyValues config;
  std::map<std::string, std::uint64_t> seeds;
  nlohmann::json metrics;    // metrics.json
  nlohmann::json geo_eval;   // geo_eval.json
  std::vector<ArtifactRef> artifacts;
};

struct PaperReference {
  struct Row {
    const char* model;
    double rouge_l, bleu, ppl, length_ratio;
  };
  static constexpr Row kTable[] = {{"Baseline", 0.226, 0.173, 1.71, 1.01}, {"Proposed", 0.249, 0.200, 1.50, 1.00}};
  static constexpr int kBestEpoch = 7;
  static constexpr int kTestInstances = 250;
  static constexpr double kDeltaWcPercent = 15.63;
  static constexpr double kDeltaWcAdjPercent = 30.96;
  static constexpr int kVisibilityQueries = 50;
};

inline constexpr const char* kPaperBlockTitle = "Paper reference (not reproduced)";
inline constexpr const char* kNoSurvivorsMarker = "no queries survived exclusion";

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string fixed4(const nlohmann::json& v) { return v.is_number() ? fmt("%.4f", v.get<double>()) : "n/a"; }

inline std::string percent(const nlohmann::json& v) {
  return v.is_number() ? fmt("%+.2f%%", 100.0 * v.get<double>()) : "n/a";
}

inline std::string cell(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

}  // namespace detail

inline std::string render_markdown(const ReportInputs& in) {
  using detail::cell;
  using detail::fixed4;
  std::string md;
  md += "# GEO run report\n\n";

  md += "## Configuration\n\n| key | value |\n|---|---|\n";
  for (const auto& [k, v] : in.config) md += "| " + cell(k) + " | " + cell(v) + " |\n";
  md += "\nSeeds:";
  for (const auto& [k, v] : in.seeds) md += " " + k + "=" + std::to_string(v);
  md += "\n\n";

  const auto& m = in.metrics;
  md += "## Text metrics (test split)\n\n";
  md += "| model / condition | n | rouge_l | bleu | ppl | length ratio |\n|---|---|---|---|---|---|\n";
  md += "| " + cell(m.value("condition", std::string("?"))) + " | " + std::to_string(m.value("n", 0)) + " | " +
        fixed4(m["rouge_l"]) + " | " + fixed4(m["bleu"]) + " | " + fixed4(m["ppl"]) + " | " +
        fixed4(m["length_ratio"]) + " |\n\n";
  if (m.value("ppl_source", std::string()) == "unigram") {
    md += "ppl is computed under an add-k unigram model fitted on the train-split optimised texts. "
          "It is a fallback, not the perplexity of a trained sequence model.\n\n";
  } else {
    md += "ppl is computed from the supplied per-token log-probabilities.\n\n";
  }

  const auto& g = in.geo_eval;
  md += "## Visibility (geo-eval)\n\n";
  md += "Outlier policy: " + g.value("outlier_policy", std::string("?")) +
        ". Replacement seed: " + std::to_string(g.value("seed", std::uint64_t{0})) +
        ". Queries evaluated: " + std::to_string(g.value("evaluated", 0)) +
        ", included: " + std::to_string(g.value("included", 0)) + ".\n\n";
  if (!g["mean_delta_wc"].is_number()) {
    md += "**" + std::string(kNoSurvivorsMarker) + "**\n\n";
  } else {
    md += "| metric | mean relative improvement |\n|---|---|\n";
    md += "| wc (absolute word count) | " + detail::percent(g["mean_delta_wc"]) + " |\n";
    md += "| wc_adj (position-adjusted word count) | " + detail::percent(g["mean_delta_wc_adj"]) + " |\n\n";
  }
  if (g.contains("per_query") && !g["per_query"].empty()) {
    md += "| query | target | delta wc | delta wc_adj | excluded |\n|---|---|---|---|---|\n";
    for (const auto& q : g["per_query"]) {
      const bool excl = !q["excluded"].is_null();
      md += "| " + cell(q.value("query_id", std::string())) + " | " + std::to_string(q.value("target", 0)) + " | " +
            (excl && q["excluded"] != "outlier" ? "n/a" : detail::percent(q["delta_wc"])) + " | " +
            (excl && q["excluded"] != "outlier" ? "n/a" : detail::percent(q["delta_wc_adj"])) + " | " +
            (excl ? q["excluded"].get<std::string>() : "") + " |\n";
    }
    md += "\n";
  }
  for (const auto& w : g.value("warnings", std::vector<std::string>{})) md += "Warning: " + w + "\n";
  if (g.contains("warnings") && !g["warnings"].empty()) md += "\n";

  md += "## " + std::string(kPaperBlockTitle) + "\n\n";
  md += "Values published for the fine-tuned model and live engines. This run does not reproduce them.\n\n";
  md += "Text metrics, best checkpoint (epoch " + std::to_string(PaperReference::kBestEpoch) + "), " +
        std::to_string(PaperReference::kTestInstances) + " test instances:\n\n";
  md += "| model | rouge_l | bleu | ppl | length ratio |\n|---|---|---|---|---|\n";
  for (const auto& r : PaperReference::kTable) {
    md += std::string("| ") + r.model + " | " + detail::fmt("%.3f", r.rouge_l) + " | " + detail::fmt("%.3f", r.bleu) +
          " | " + detail::fmt("%.2f", r.ppl) + " | " + detail::fmt("%.2f", r.length_ratio) + " |\n";
  }
  md += "\nVisibility improvement of the proposed model, n=" + std::to_string(PaperReference::kVisibilityQueries) +
        " queries, normalised, outliers excluded:\n\n";
  md += "| metric | improvement |\n|---|---|\n";
  md += "| wc | " + detail::fmt("+%.2f%%", PaperReference::kDeltaWcPercent) + " |\n";
  md += "| wc_adj | " + detail::fmt("+%.2f%%", PaperReference::kDeltaWcAdjPercent) + " |\n\n";

  md += "## Artifacts\n\n| artifact | sha256 |\n|---|---|\n";
  for (const auto& a : in.artifacts) md += "| " + cell(a.path) + " | " + a.digest + " |\n";
  return md;
}

inline std::string render_json(const ReportInputs& in) {
  nlohmann::ordered_json j;
  j["config"] = in.config;
  j["seeds"] = in.seeds;
  nlohmann::ordered_json metrics;
  for (const char* k : {"condition", "ppl_source", "n", "rouge_l", "bleu", "ppl", "length_ratio"}) {
    if (in.metrics.contains(k)) metrics[k] = in.metrics[k];
  }
  j["metrics"] = metrics;
  nlohmann::ordered_json vis;
  for (const char* k : {"outlier_policy", "seed", "evaluated", "included", "mean_delta_wc", "mean_delta_wc_adj"}) {
    if (in.geo_eval.contains(k)) vis[k] = in.geo_eval[k];
  }
  vis["no_queries_survived"] = !in.geo_eval.value("mean_delta_wc", nlohmann::json()).is_number();
  j["visibility"] = vis;
  nlohmann::ordered_json paper;
  paper["reproduced"] = false;
  paper["best_epoch"] = PaperReference::kBestEpoch;
  for (const auto& r : PaperReference::kTable) {
    paper["text_metrics"][r.model] = {
        {"rouge_l", r.rouge_l}, {"bleu", r.bleu}, {"ppl", r.ppl}, {"length_ratio", r.length_ratio}};
  }
  paper["visibility"] = {{"n", PaperReference::kVisibilityQueries},
                         {"delta_wc_percent", PaperReference::kDeltaWcPercent},
                         {"delta_wc_adj_percent", PaperReference::kDeltaWcAdjPercent}};
  j["paper_reference"] = paper;
  auto arts = nlohmann::ordered_json::array();
  for (const auto& a : in.artifacts) arts.push_back({{"path", a.path}, {"digest", a.digest}});
  j["artifacts"] = arts;
  return j.dump(2) + "\n";
}

struct RenderedReport {
  std::string markdown;
  std::string json;
};

inline RenderedReport emit_report(const ReportInputs& in) { return {render_markdown(in), render_json(in)}; }

}  // namespace geo::harness
