#pragma once

// Run configuration: a "key = value" document. '#' starts a comment line.
// Relative paths resolve against the directory holding the config file.
//
//   corpus.fixtures          recorded search results and pages (required)
//   corpus.excluded_domains  comma-separated hosts
//   corpus.review_exclusions file with one URL per line
//   corpus.docs_per_query, corpus.min_chars, corpus.max_chars
//   split.seed, split.bins, split.train_fraction, split.test_queries
//   engine.mode              mock | live
//   engine.endpoint, engine.model, engine.temperature, engine.max_attempts,
//   engine.pacing_ms, engine.backoff_ms, engine.seed, engine.cache_dir
//   prompts.dir
//   metrics.lowercase, metrics.strip_punctuation, metrics.unigram_k,
//   metrics.logprobs         optional JSONL {"id", "logprobs": [...]}
//   geo_eval.seed, geo_eval.queries, geo_eval.outlier, geo_eval.scope (test | all)
//   run.workers, run.timestamp
//   output.dir               (required)

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "geo/common/digest.hpp"
#include "geo/common/error.hpp"
#include "geo/common/text.hpp"
#include "geo/corpus/quality.hpp"
#include "geo/corpus/trim.hpp"
#include "geo/genengine/client.hpp"
#include "geo/genengine/prompts.hpp"
#include "geo/textmetrics/tokenize.hpp"
#include "geo/trainkit/split.hpp"
#include "geo/visibility/improvement.hpp"

namespace geo::harness {

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::string_view doc) {
  KeyValues kv;
  std::istringstream in{std::string(doc)};
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("config line " + std::to_string(row) + ": expected key = value");
    }
    const std::string key(text::trim(t.substr(0, eq)));
    if (key.empty()) throw config_error("config line " + std::to_string(row) + ": empty key");
    kv[key] = std::string(text::trim(t.substr(eq + 1)));
  }
  return kv;
}

struct RunConfig {
  KeyValues values;  // as written, after command-line overrides
  std::filesystem::path base_dir = ".";

  std::filesystem::path fixtures;
  std::set<std::string> excluded_domains;
  std::optional<std::filesystem::path> review_exclusions;
  std::size_t docs_per_query = 5;
  std::size_t min_chars = corpus::kMinChars;
  std::size_t max_chars = corpus::kMaxChars;

  trainkit::SplitConfig split;

  std::string engine_mode = "mock";
  genengine::EngineConfig engine;
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path prompts_dir = GEO_DEFAULT_PROMPT_DIR;

  textmetrics::Normalization normalization;
  double unigram_k = 1.0;
  std::optional<std::filesystem::path> logprobs;

  std::uint64_t geo_seed = 0;
  std::size_t geo_queries = 50;
  visibility::OutlierPolicy outlier;
  std::string geo_scope = "test";

  std::size_t workers = 1;
  std::optional<std::string> timestamp;
  std::filesystem::path output_dir;

  /// Seeds as recorded in reports.
  std::map<std::string, std::uint64_t> seeds() const {
    return {{"split", split.seed}, {"engine", engine.seed}, {"geo_eval", geo_seed}};
  }

  /// Config entries embedded in reports: everything except the output location.
  KeyValues reportable() const {
    KeyValues out = values;
    out.erase("output.dir");
    return out;
  }
};

namespace detail {

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    auto x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error("config key '" + key + "': expected true or false, got '" + v + "'");
}

}  // namespace detail

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> k = {
      "corpus.fixtures",      "corpus.excluded_domains", "corpus.review_exclusions", "corpus.docs_per_query",
      "corpus.min_chars",     "corpus.max_chars",        "split.seed",               "split.bins",
      "split.train_fraction", "split.test_queries",      "engine.mode",              "engine.endpoint",
      "engine.model",         "engine.temperature",      "engine.max_attempts",      "engine.pacing_ms",
      "engine.backoff_ms",    "engine.seed",             "engine.cache_dir",         "prompts.dir",
      "metrics.lowercase",    "metrics.strip_punctuation", "metrics.unigram_k",      "metrics.logprobs",
      "geo_eval.seed",        "geo_eval.queries",        "geo_eval.outlier",         "geo_eval.scope",
      "run.workers",          "run.timestamp",           "output.dir"};
  return k;
}

/// Builds and validates a RunConfig. Input paths must exist.
inline RunConfig make_run_config(KeyValues kv, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.values = kv;
  c.base_dir = base_dir;
  for (const auto& [k, v] : kv) {
    if (!known_config_keys().contains(k)) throw config_error("unknown config key '" + k + "'");
  }
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };
  auto existing = [&](const std::string& key) {
    auto p = path(kv.at(key));
    if (!std::filesystem::exists(p)) throw config_error("config key '" + key + "': path not found: " + p.string());
    return p;
  };

  if (!get("corpus.fixtures")) throw config_error("config key 'corpus.fixtures' is required");
  c.fixtures = existing("corpus.fixtures");
  if (auto v = get("corpus.excluded_domains")) {
    std::string item;
    std::istringstream in(*v);
    while (std::getline(in, item, ',')) {
      auto t = text::trim(item);
      if (!t.empty()) c.excluded_domains.insert(text::ascii_lower(t));
    }
  }
  if (get("corpus.review_exclusions")) c.review_exclusions = existing("corpus.review_exclusions");
  if (auto v = get("corpus.docs_per_query")) c.docs_per_query = detail::to_u64("corpus.docs_per_query", *v);
  if (auto v = get("corpus.min_chars")) c.min_chars = detail::to_u64("corpus.min_chars", *v);
  if (auto v = get("corpus.max_chars")) c.max_chars = detail::to_u64("corpus.max_chars", *v);
  if (c.max_chars == 0) throw config_error("corpus.max_chars must be > 0");

  c.split.docs_per_query = c.docs_per_query;
  if (auto v = get("split.seed")) c.split.seed = detail::to_u64("split.seed", *v);
  if (auto v = get("split.bins")) c.split.bins = detail::to_u64("split.bins", *v);
  if (auto v = get("split.train_fraction")) c.split.train_fraction = detail::to_double("split.train_fraction", *v);
  if (auto v = get("split.test_queries")) c.split.test_queries = detail::to_u64("split.test_queries", *v);
  if (c.split.bins == 0) throw config_error("split.bins must be > 0");
  if (!(c.split.train_fraction > 0.0 && c.split.train_fraction < 1.0)) {
    throw config_error("split.train_fraction must be in (0, 1)");
  }

  if (auto v = get("engine.mode")) c.engine_mode = *v;
  if (c.engine_mode != "mock" && c.engine_mode != "live") throw config_error("engine.mode must be mock or live");
  if (c.engine_mode == "live" && (!get("engine.endpoint") || !get("engine.model"))) {
    throw config_error("live engine needs engine.endpoint and engine.model");
  }
  if (auto v = get("engine.endpoint")) c.engine.endpoint = *v;
  if (auto v = get("engine.model")) c.engine.model_name = *v;
  if (auto v = get("engine.temperature")) c.engine.temperature = detail::to_double("engine.temperature", *v);
  if (auto v = get("engine.max_attempts")) {
    c.engine.max_attempts = static_cast<int>(detail::to_u64("engine.max_attempts", *v));
  }
  if (auto v = get("engine.pacing_ms")) {
    c.engine.pacing_interval = std::chrono::milliseconds(detail::to_u64("engine.pacing_ms", *v));
  }
  if (auto v = get("engine.backoff_ms")) {
    c.engine.backoff_base = std::chrono::milliseconds(detail::to_u64("engine.backoff_ms", *v));
  }
  if (auto v = get("engine.seed")) c.engine.seed = detail::to_u64("engine.seed", *v);
  if (auto v = get("engine.cache_dir")) c.cache_dir = path(*v);
  c.engine.validate();

  if (get("prompts.dir")) c.prompts_dir = existing("prompts.dir");

  if (auto v = get("metrics.lowercase")) c.normalization.lowercase = detail::to_bool("metrics.lowercase", *v);
  if (auto v = get("metrics.strip_punctuation")) {
    c.normalization.strip_punctuation = detail::to_bool("metrics.strip_punctuation", *v);
  }
  if (auto v = get("metrics.unigram_k")) c.unigram_k = detail::to_double("metrics.unigram_k", *v);
  if (c.unigram_k < 0) throw config_error("metrics.unigram_k must be >= 0");
  if (get("metrics.logprobs")) c.logprobs = existing("metrics.logprobs");

  if (auto v = get("geo_eval.seed")) c.geo_seed = detail::to_u64("geo_eval.seed", *v);
  if (auto v = get("geo_eval.queries")) c.geo_queries = detail::to_u64("geo_eval.queries", *v);
  if (auto v = get("geo_eval.outlier")) c.outlier = visibility::OutlierPolicy::parse(*v);
  if (auto v = get("geo_eval.scope")) c.geo_scope = *v;
  if (c.geo_scope != "test" && c.geo_scope != "all") throw config_error("geo_eval.scope must be test or all");

  if (auto v = get("run.workers")) c.workers = detail::to_u64("run.workers", *v);
  if (c.workers == 0) c.workers = 1;
  if (auto v = get("run.timestamp")) c.timestamp = *v;

  if (!get("output.dir")) throw config_error("config key 'output.dir' is required");
  c.output_dir = path(kv.at("output.dir"));
  return c;
}

/// Reads a config file; `overrides` win over file entries.
inline RunConfig load_run_config(const std::filesystem::path& file, const KeyValues& overrides = {}) {
  if (!std::filesystem::exists(file)) throw config_error("config file not found: " + file.string());
  auto kv = parse_key_values(read_file(file));
  for (const auto& [k, v] : overrides) kv[k] = v;
  auto base = file.parent_path();
  if (base.empty()) base = ".";
  return make_run_config(std::move(kv), base);
}

}  // namespace geo::harness
