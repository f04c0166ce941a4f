#pragma once

// Per-stage work, free of file layout concerns. The pipeline and the
// standalone CLI subcommands both call these.

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/common/rng.hpp"
#include "geo/corpus/types.hpp"
#include "geo/genengine/client.hpp"
#include "geo/genengine/prompts.hpp"
#include "geo/genengine/tasks.hpp"
#include "geo/harness/parallel.hpp"
#include "geo/harness/unigram.hpp"
#include "geo/textmetrics/metrics.hpp"
#include "geo/trainkit/split.hpp"
#include "geo/visibility/improvement.hpp"
#include "geo/visibility/parse.hpp"

namespace geo::harness {

// ---- label -----------------------------------------------------------------

struct LabelOutcome {
  std::vector<corpus::ContentPair> labelled;  // valid pairs only, input order
  std::vector<genengine::OptimisationTrace> traces;
  std::vector<std::string> urls;  // parallel to traces
  std::size_t invalid = 0;
};

inline LabelOutcome label_pairs(const std::vector<corpus::ContentPair>& pairs, genengine::EngineClient& client,
                                const genengine::PromptSet& prompts, std::size_t workers = 1) {
  LabelOutcome out;
  out.traces.resize(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    out.traces[i] = genengine::optimize_content(pairs[i].source_text, client, prompts);
  });
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.urls.push_back(pairs[i].url);
    if (!out.traces[i].valid) {
      ++out.invalid;
      continue;
    }
    auto p = pairs[i];
    p.optimized_text = out.traces[i].final_text;
    out.labelled.push_back(std::move(p));
  }
  return out;
}

inline std::string format_traces(const LabelOutcome& outcome) {
  std::string out;
  for (std::size_t i = 0; i < outcome.traces.size(); ++i) {
    const auto& t = outcome.traces[i];
    nlohmann::ordered_json j;
    j["url"] = outcome.urls[i];
    j["valid"] = t.valid;
    j["phase_outputs"] = t.phase_outputs;
    if (!t.error.empty()) j["error"] = t.error;
    out += j.dump() + "\n";
  }
  return out;
}

// ---- split -----------------------------------------------------------------

inline std::string item_id(const corpus::ContentPair& p) { return p.query_id + "|" + p.url; }

inline std::vector<trainkit::SplitItem> split_items(const std::vector<corpus::ContentPair>& pairs) {
  std::vector<trainkit::SplitItem> items;
  for (const auto& p : pairs) items.push_back({item_id(p), p.query_id, utf8::char_count(p.source_text)});
  return items;
}

// ---- metrics ---------------------------------------------------------------

struct MetricRow {
  std::string id;
  textmetrics::MetricReport report;
};

struct MetricsSummary {
  std::string condition;  // what was compared against what
  std::string ppl_source;  // "unigram" or "logprobs"
  std::size_t n = 0;
  double rouge_l = 0, bleu = 0, length_ratio = 0;
  std::optional<double> ppl;
  std::vector<MetricRow> rows;
};

/// Copy-source baseline: candidate w, reference w', over test-split items.
/// Perplexity comes from `logprobs` (by item id) when given, else from a
/// unigram model fitted on the train-split references.
inline MetricsSummary copy_source_metrics(const std::vector<corpus::ContentPair>& pairs,
                                          const trainkit::SplitAssignment& split, textmetrics::Normalization norm,
                                          double unigram_k,
                                          const std::map<std::string, textmetrics::TokenLogProbSeries>* logprobs = nullptr) {
  MetricsSummary s;
  s.condition = "copy-source (w vs w')";
  s.ppl_source = logprobs ? "logprobs" : "unigram";
  std::vector<std::string> train_refs;
  for (const auto& p : pairs) {
    auto it = split.membership.find(item_id(p));
    if (it != split.membership.end() && it->second == trainkit::Membership::train && p.optimized_text) {
      train_refs.push_back(*p.optimized_text);
    }
  }
  std::optional<UnigramLm> lm;
  if (!logprobs && !train_refs.empty()) lm = fit_unigram(train_refs, unigram_k, norm);

  double ppl_sum = 0.0;
  std::size_t ppl_n = 0;
  for (const auto& p : pairs) {
    auto it = split.membership.find(item_id(p));
    if (it == split.membership.end() || it->second != trainkit::Membership::test || !p.optimized_text) continue;
    std::optional<textmetrics::TokenLogProbSeries> series;
    if (logprobs) {
      if (auto lp = logprobs->find(item_id(p)); lp != logprobs->end()) series = lp->second;
    } else if (lm) {
      series = score_text(*lm, p.source_text);
    }
    if (series && series->logprobs.empty()) series.reset();
    MetricRow row{item_id(p), textmetrics::evaluate(p.source_text, *p.optimized_text, series ? &*series : nullptr, norm)};
    s.rouge_l += row.report.rouge_l;
    s.bleu += row.report.bleu;
    s.length_ratio += row.report.length_ratio;
    if (row.report.perplexity) {
      ppl_sum += *row.report.perplexity;
      ++ppl_n;
    }
    s.rows.push_back(std::move(row));
  }
  s.n = s.rows.size();
  if (s.n > 0) {
    s.rouge_l /= static_cast<double>(s.n);
    s.bleu /= static_cast<double>(s.n);
    s.length_ratio /= static_cast<double>(s.n);
  }
  if (ppl_n > 0) s.ppl = ppl_sum / static_cast<double>(ppl_n);
  return s;
}

inline nlohmann::ordered_json to_json(const MetricsSummary& s) {
  nlohmann::ordered_json j;
  j["condition"] = s.condition;
  j["ppl_source"] = s.ppl_source;
  j["n"] = s.n;
  j["rouge_l"] = s.rouge_l;
  j["bleu"] = s.bleu;
  j["length_ratio"] = s.length_ratio;
  j["ppl"] = s.ppl ? nlohmann::ordered_json(*s.ppl) : nlohmann::ordered_json(nullptr);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : s.rows) {
    nlohmann::ordered_json row;
    row["id"] = r.id;
    row["rouge_l"] = r.report.rouge_l;
    row["bleu"] = r.report.bleu;
    row["length_ratio"] = r.report.length_ratio;
    row["ppl"] = r.report.perplexity ? nlohmann::ordered_json(*r.report.perplexity) : nlohmann::ordered_json(nullptr);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

/// JSONL of {"id": ..., "logprobs": [...]}.
inline std::map<std::string, textmetrics::TokenLogProbSeries> parse_logprobs(std::string_view doc) {
  std::map<std::string, textmetrics::TokenLogProbSeries> out;
  std::size_t row = 0, start = 0;
  while (start < doc.size()) {
    auto end = doc.find('\n', start);
    if (end == std::string_view::npos) end = doc.size();
    ++row;
    auto line = doc.substr(start, end - start);
    start = end + 1;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      textmetrics::TokenLogProbSeries s{j.at("logprobs").get<std::vector<double>>()};
      s.validate();
      out[j.at("id").get<std::string>()] = std::move(s);
    } catch (const std::exception& e) {
      throw format_error(row, e.what());
    }
  }
  return out;
}

// ---- geo-eval --------------------------------------------------------------

struct GeoEvalConfig {
  std::size_t queries = 50;
  std::uint64_t seed = 0;
  visibility::OutlierPolicy policy;
  std::size_t workers = 1;
};

struct QueryEvaluation {
  std::string query_id;
  int target = 0;
  std::string baseline_answer;
  std::string treated_answer;
  std::string error;
  visibility::QueryImprovement improvement;
};

struct GeoEvalOutcome {
  GeoEvalConfig config;
  std::vector<QueryEvaluation> queries;
  std::optional<visibility::ImprovementReport> report;  // empty when nothing survived
  std::vector<std::string> warnings;
};

/// Queries with at least five labelled pairs, in first-appearance order,
/// restricted to `allowed` when given.
inline std::vector<std::string> eligible_queries(const std::vector<corpus::ContentPair>& pairs,
                                                 const std::set<std::string>* allowed = nullptr) {
  std::vector<std::string> order;
  std::map<std::string, std::size_t> labelled;
  for (const auto& p : pairs) {
    if (allowed && !allowed->contains(p.query_id)) continue;
    if (!labelled.contains(p.query_id)) order.push_back(p.query_id);
    labelled[p.query_id] += p.optimized_text.has_value();
  }
  std::vector<std::string> out;
  for (const auto& q : order) {
    if (labelled[q] >= static_cast<std::size_t>(visibility::kMaxSources)) out.push_back(q);
  }
  return out;
}

/// For each query: the first five labelled sources form the source set; one
/// target index in 1..5 (drawn from Rng(seed) in query order) is swapped for
/// its optimised text; both answers are parsed and compared.
inline GeoEvalOutcome geo_eval(const std::vector<corpus::ContentPair>& pairs,
                               const std::map<std::string, corpus::QueryRecord>& query_records,
                               genengine::EngineClient& client, const genengine::PromptSet& prompts,
                               const GeoEvalConfig& cfg, const std::set<std::string>* allowed = nullptr) {
  GeoEvalOutcome out;
  out.config = cfg;
  auto ids = eligible_queries(pairs, allowed);
  if (ids.size() < cfg.queries) {
    out.warnings.push_back("requested " + std::to_string(cfg.queries) + " queries, " + std::to_string(ids.size()) +
                           " eligible");
  } else {
    ids.resize(cfg.queries);
  }

  Rng rng(cfg.seed);
  std::vector<genengine::SourceSet> sets;
  for (const auto& qid : ids) {
    std::vector<corpus::ContentPair> chosen;
    for (const auto& p : pairs) {
      if (p.query_id == qid && p.optimized_text && chosen.size() < static_cast<std::size_t>(visibility::kMaxSources)) {
        chosen.push_back(p);
      }
    }
    auto rec = query_records.contains(qid) ? query_records.at(qid) : corpus::QueryRecord{qid, "", qid};
    sets.push_back(genengine::SourceSet::from_pairs(rec, chosen));
    QueryEvaluation qe;
    qe.query_id = qid;
    qe.target = static_cast<int>(rng.uniform_index(visibility::kMaxSources)) + 1;
    out.queries.push_back(std::move(qe));
  }

  parallel_for(sets.size(), cfg.workers, [&](std::size_t i) {
    auto& qe = out.queries[i];
    auto treated = sets[i];
    treated.sources[static_cast<std::size_t>(qe.target - 1)].optimized = true;
    try {
      qe.baseline_answer = genengine::answer_query(sets[i], client, prompts);
      qe.treated_answer = genengine::answer_query(treated, client, prompts);
    } catch (const engine_error& e) {
      qe.error = e.what();
      qe.improvement.query_id = qe.query_id;
      qe.improvement.target = qe.target;
      qe.improvement.excluded = visibility::ExclusionReason::engine_error;
      return;
    }
    qe.improvement = visibility::compare_conditions(visibility::parse_response(qe.baseline_answer),
                                                    visibility::parse_response(qe.treated_answer), qe.target,
                                                    qe.query_id);
  });

  std::vector<visibility::QueryImprovement> improvements;
  for (const auto& qe : out.queries) improvements.push_back(qe.improvement);
  try {
    out.report = visibility::aggregate(improvements, cfg.policy);
    for (std::size_t i = 0; i < out.queries.size(); ++i) out.queries[i].improvement = out.report->per_query[i];
  } catch (const precondition_error&) {
    out.report.reset();
    out.warnings.push_back("no queries survived exclusion");
  }
  return out;
}

inline nlohmann::ordered_json to_json(const GeoEvalOutcome& o) {
  nlohmann::ordered_json j;
  j["seed"] = o.config.seed;
  j["queries_requested"] = o.config.queries;
  j["outlier_policy"] = o.config.policy.name();
  j["evaluated"] = o.queries.size();
  if (o.report) {
    j["included"] = o.report->included;
    j["mean_delta_wc"] = o.report->mean_delta_wc;
    j["mean_delta_wc_adj"] = o.report->mean_delta_wc_adj;
  } else {
    j["included"] = 0;
    j["mean_delta_wc"] = nullptr;
    j["mean_delta_wc_adj"] = nullptr;
  }
  j["warnings"] = o.warnings;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& q : o.queries) {
    const auto& imp = q.improvement;
    nlohmann::ordered_json r;
    r["query_id"] = q.query_id;
    r["target"] = q.target;
    r["baseline_wc"] = imp.baseline.wc;
    r["baseline_wc_adj"] = imp.baseline.wc_adj;
    r["baseline_words"] = imp.baseline_words;
    r["treated_wc"] = imp.treated.wc;
    r["treated_wc_adj"] = imp.treated.wc_adj;
    r["treated_words"] = imp.treated_words;
    r["delta_wc"] = imp.delta_wc;
    r["delta_wc_adj"] = imp.delta_wc_adj;
    r["excluded"] = imp.excluded ? nlohmann::ordered_json(std::string(visibility::to_string(*imp.excluded)))
                                 : nlohmann::ordered_json(nullptr);
    if (!q.error.empty()) r["error"] = q.error;
    r["baseline_answer"] = q.baseline_answer;
    r["treated_answer"] = q.treated_answer;
    rows.push_back(std::move(r));
  }
  j["per_query"] = std::move(rows);
  return j;
}

}  // namespace geo::harness
