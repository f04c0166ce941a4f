#pragma once

// Staged pipeline: ingest -> clean -> split -> label -> metrics -> geo-eval
// -> report. Each stage has a key derived from its parameters and the
// digests of its inputs; a stage whose key matches the previous manifest and
// whose outputs are intact is skipped and keeps its old record.
//
// Artifacts, relative to the output directory:
//   documents.jsonl, queries.jsonl   ingest
//   dataset_raw.csv                  clean
//   split.jsonl                      split
//   dataset.csv, traces.jsonl        label
//   metrics.json                     metrics
//   geo_eval.json                    geo-eval
//   report.md, report.json           report
//   manifest.json                    written after every stage

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geo/common/digest.hpp"
#include "geo/common/error.hpp"
#include "geo/corpus/dataset.hpp"
#include "geo/corpus/ingest.hpp"
#include "geo/genengine/client.hpp"
#include "geo/genengine/http_transport.hpp"
#include "geo/genengine/mock_engine.hpp"
#include "geo/genengine/prompts.hpp"
#include "geo/harness/config.hpp"
#include "geo/harness/report.hpp"
#include "geo/harness/stages.hpp"
#include "geo/trainkit/split.hpp"

namespace geo::harness {

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> k = {"ingest", "clean", "split", "label", "metrics", "geo-eval", "report"};
  return k;
}

/// Digest over every regular file below `dir`: sorted relative paths and
/// their contents.
inline std::string directory_digest(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::filesystem::path>> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.emplace_back(std::filesystem::relative(e.path(), dir).generic_string(), e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& [rel, path] : files) acc += rel + "\n" + file_digest(path) + "\n";
  return sha256_hex(acc);
}

inline std::string path_digest(const std::filesystem::path& p) {
  return std::filesystem::is_directory(p) ? directory_digest(p) : file_digest(p);
}

struct StageRecord {
  std::string stage;
  std::string key;
  std::vector<ArtifactRef> inputs;
  std::vector<ArtifactRef> outputs;
  std::string started;
  std::string finished;
};

struct Manifest {
  std::map<std::string, std::uint64_t> seeds;
  std::vector<StageRecord> stages;

  const StageRecord* find(const std::string& stage) const {
    for (const auto& s : stages) {
      if (s.stage == stage) return &s;
    }
    return nullptr;
  }

  void upsert(StageRecord rec) {
    for (auto& s : stages) {
      if (s.stage == rec.stage) {
        s = std::move(rec);
        return;
      }
    }
    stages.push_back(std::move(rec));
  }

  static nlohmann::ordered_json artifacts_json(const std::vector<ArtifactRef>& refs) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& r : refs) a.push_back({{"path", r.path}, {"digest", r.digest}});
    return a;
  }

  /// Digest over seeds and stage contents, timestamps excluded.
  std::string digest() const {
    nlohmann::ordered_json j;
    j["seeds"] = seeds;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : stages) {
      arr.push_back({{"stage", s.stage},
                     {"key", s.key},
                     {"inputs", artifacts_json(s.inputs)},
                     {"outputs", artifacts_json(s.outputs)}});
    }
    j["stages"] = arr;
    return sha256_hex(j.dump());
  }

  std::string to_string() const {
    nlohmann::ordered_json j;
    j["seeds"] = seeds;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : stages) {
      nlohmann::ordered_json r;
      r["stage"] = s.stage;
      r["key"] = s.key;
      r["inputs"] = artifacts_json(s.inputs);
      r["outputs"] = artifacts_json(s.outputs);
      r["started"] = s.started;
      r["finished"] = s.finished;
      arr.push_back(std::move(r));
    }
    j["stages"] = arr;
    j["digest"] = digest();
    return j.dump(2) + "\n";
  }

  static Manifest parse(std::string_view doc) {
    Manifest m;
    auto j = nlohmann::json::parse(doc);
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    auto refs = [](const nlohmann::json& a) {
      std::vector<ArtifactRef> out;
      for (const auto& r : a) out.push_back({r.at("path").get<std::string>(), r.at("digest").get<std::string>()});
      return out;
    };
    for (const auto& s : j.at("stages")) {
      m.stages.push_back({s.at("stage").get<std::string>(), s.at("key").get<std::string>(), refs(s.at("inputs")),
                          refs(s.at("outputs")), s.at("started").get<std::string>(),
                          s.at("finished").get<std::string>()});
    }
    return m;
  }
};

struct PipelineResult {
  Manifest manifest;
  std::vector<std::string> ran;
  std::vector<std::string> skipped;
  std::uint64_t engine_calls = 0;
  std::uint64_t cache_hits = 0;
};

/// Timestamps: run.timestamp if configured, else SOURCE_DATE_EPOCH, else now.
inline std::string run_timestamp(const RunConfig& cfg) {
  if (cfg.timestamp) return *cfg.timestamp;
  std::time_t t;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::shared_ptr<genengine::Transport> make_transport(const RunConfig& cfg) {
  if (cfg.engine_mode == "live") return std::make_shared<genengine::HttpTransport>(cfg.engine);
  return std::make_shared<genengine::MockEngine>();
}

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg, std::ostream* log = nullptr) : cfg_(std::move(cfg)), log_(log) {}

  /// Runs every stage up to and including `until`.
  PipelineResult run(const std::string& until = "report") {
    const auto& names = stage_names();
    const auto stop = std::find(names.begin(), names.end(), until);
    if (stop == names.end()) throw config_error("unknown stage '" + until + "'");

    std::filesystem::create_directories(out());
    if (std::filesystem::exists(out() / "manifest.json")) {
      try {
        previous_ = Manifest::parse(read_file(out() / "manifest.json"));
      } catch (const std::exception&) {
        previous_.reset();
      }
    }
    result_ = {};
    result_.manifest.seeds = cfg_.seeds();
    if (previous_) {
      for (const auto& s : previous_->stages) result_.manifest.stages.push_back(s);
    }

    for (auto it = names.begin(); it != stop + 1; ++it) run_stage(*it);
    if (client_) {
      result_.engine_calls = client_->telemetry().transport_calls;
      result_.cache_hits = client_->telemetry().cache_hits;
    }
    return result_;
  }

 private:
  struct StageSpec {
    nlohmann::ordered_json params;
    std::vector<std::filesystem::path> inputs;  // absolute
    std::vector<std::string> outputs;           // relative to out()
    std::function<void()> body;
  };

  const std::filesystem::path& out() const { return cfg_.output_dir; }

  std::string display_path(const std::filesystem::path& p) const {
    auto rel = std::filesystem::relative(p, out());
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    auto from_base = std::filesystem::relative(p, cfg_.base_dir);
    return from_base.empty() ? p.generic_string() : from_base.generic_string();
  }

  void note(const std::string& msg) {
    if (log_) *log_ << msg << "\n";
  }

  genengine::EngineClient& client() {
    if (!client_) {
      auto cache = cfg_.cache_dir ? cfg_.cache_dir : std::optional<std::filesystem::path>(out() / "engine_cache");
      client_ = std::make_unique<genengine::EngineClient>(cfg_.engine, make_transport(cfg_), cache);
    }
    return *client_;
  }

  const genengine::PromptSet& prompts() {
    if (!prompts_) prompts_ = genengine::PromptSet::load(cfg_.prompts_dir);
    return *prompts_;
  }

  StageSpec spec_for(const std::string& stage) {
    StageSpec s;
    const auto o = out();
    if (stage == "ingest") {
      s.params = {{"docs_per_query", cfg_.docs_per_query},
                  {"min_chars", cfg_.min_chars},
                  {"excluded_domains", cfg_.excluded_domains}};
      s.inputs = {cfg_.fixtures};
      s.outputs = {"documents.jsonl", "queries.jsonl"};
      s.body = [this, o] {
        corpus::IngestConfig ic;
        ic.docs_per_query = cfg_.docs_per_query;
        ic.min_chars = cfg_.min_chars;
        ic.excluded_domains = cfg_.excluded_domains;
        corpus::FixtureFetcher fetcher(cfg_.fixtures);
        auto queries = fetcher.queries();
        std::map<std::string, corpus::ResultList> results;
        for (const auto& q : queries) {
          if (const auto* r = fetcher.results_for(q.id)) results[q.id] = *r;
        }
        corpus::store_documents(corpus::ingest(queries, results, fetcher, ic), o / "documents.jsonl");
        write_file(o / "queries.jsonl", corpus::format_jsonl(queries));
      };
    } else if (stage == "clean") {
      s.params = {{"max_chars", cfg_.max_chars}, {"min_chars", cfg_.min_chars}};
      s.inputs = {o / "documents.jsonl"};
      if (cfg_.review_exclusions) s.inputs.push_back(*cfg_.review_exclusions);
      s.outputs = {"dataset_raw.csv"};
      s.body = [this, o] {
        std::set<std::string> review;
        if (cfg_.review_exclusions) {
          for (auto line : text::split_whitespace(read_file(*cfg_.review_exclusions))) review.emplace(line);
        }
        auto docs = corpus::load_documents(o / "documents.jsonl");
        corpus::store_dataset(corpus::clean_documents(docs, cfg_.max_chars, cfg_.min_chars, review),
                              o / "dataset_raw.csv");
      };
    } else if (stage == "split") {
      s.params = {{"seed", cfg_.split.seed},
                  {"bins", cfg_.split.bins},
                  {"train_fraction", cfg_.split.train_fraction},
                  {"test_queries", cfg_.split.test_queries},
                  {"docs_per_query", cfg_.split.docs_per_query}};
      s.inputs = {o / "dataset_raw.csv"};
      s.outputs = {"split.jsonl"};
      s.body = [this, o] {
        auto pairs = corpus::load_dataset(o / "dataset_raw.csv");
        auto split = trainkit::make_split(split_items(pairs), cfg_.split);
        write_file(o / "split.jsonl", trainkit::format_split_manifest(split));
      };
    } else if (stage == "label") {
      s.params = engine_params();
      s.inputs = {o / "dataset_raw.csv", cfg_.prompts_dir};
      s.outputs = {"dataset.csv", "traces.jsonl"};
      s.body = [this, o] {
        auto pairs = corpus::load_dataset(o / "dataset_raw.csv");
        auto outcome = label_pairs(pairs, client(), prompts(), cfg_.workers);
        if (outcome.invalid > 0) note("label: " + std::to_string(outcome.invalid) + " pairs invalidated");
        corpus::store_dataset(outcome.labelled, o / "dataset.csv");
        write_file(o / "traces.jsonl", format_traces(outcome));
      };
    } else if (stage == "metrics") {
      s.params = {{"lowercase", cfg_.normalization.lowercase},
                  {"strip_punctuation", cfg_.normalization.strip_punctuation},
                  {"unigram_k", cfg_.unigram_k}};
      s.inputs = {o / "dataset.csv", o / "split.jsonl"};
      if (cfg_.logprobs) s.inputs.push_back(*cfg_.logprobs);
      s.outputs = {"metrics.json"};
      s.body = [this, o] {
        auto pairs = corpus::load_dataset(o / "dataset.csv");
        auto split = trainkit::parse_split_manifest(read_file(o / "split.jsonl"));
        std::optional<std::map<std::string, textmetrics::TokenLogProbSeries>> lp;
        if (cfg_.logprobs) lp = parse_logprobs(read_file(*cfg_.logprobs));
        auto summary =
            copy_source_metrics(pairs, split, cfg_.normalization, cfg_.unigram_k, lp ? &*lp : nullptr);
        write_file(o / "metrics.json", to_json(summary).dump(2) + "\n");
      };
    } else if (stage == "geo-eval") {
      s.params = engine_params();
      s.params["geo_seed"] = cfg_.geo_seed;
      s.params["queries"] = cfg_.geo_queries;
      s.params["outlier"] = cfg_.outlier.name();
      s.params["scope"] = cfg_.geo_scope;
      s.inputs = {o / "dataset.csv", o / "split.jsonl", o / "queries.jsonl", cfg_.prompts_dir};
      s.outputs = {"geo_eval.json"};
      s.body = [this, o] {
        auto pairs = corpus::load_dataset(o / "dataset.csv");
        std::map<std::string, corpus::QueryRecord> records;
        for (auto& q : corpus::parse_jsonl<corpus::QueryRecord>(read_file(o / "queries.jsonl"))) records[q.id] = q;
        std::set<std::string> allowed;
        if (cfg_.geo_scope == "test") {
          auto split = trainkit::parse_split_manifest(read_file(o / "split.jsonl"));
          for (const auto& p : pairs) {
            auto it = split.membership.find(item_id(p));
            if (it != split.membership.end() && it->second == trainkit::Membership::test) allowed.insert(p.query_id);
          }
        }
        GeoEvalConfig gc{cfg_.geo_queries, cfg_.geo_seed, cfg_.outlier, cfg_.workers};
        auto outcome = geo_eval(pairs, records, client(), prompts(), gc, cfg_.geo_scope == "test" ? &allowed : nullptr);
        for (const auto& w : outcome.warnings) note("geo-eval: " + w);
        write_file(o / "geo_eval.json", to_json(outcome).dump(2) + "\n");
      };
    } else if (stage == "report") {
      s.params = {{"config", cfg_.reportable()}, {"seeds", cfg_.seeds()}};
      s.inputs = {o / "metrics.json", o / "geo_eval.json"};
      s.outputs = {"report.md", "report.json"};
      s.body = [this, o] {
        ReportInputs in;
        in.config = cfg_.reportable();
        in.seeds = cfg_.seeds();
        in.metrics = nlohmann::json::parse(read_file(o / "metrics.json"));
        in.geo_eval = nlohmann::json::parse(read_file(o / "geo_eval.json"));
        for (const char* name : {"dataset.csv", "split.jsonl", "metrics.json", "geo_eval.json"}) {
          in.artifacts.push_back({name, file_digest(o / name)});
        }
        auto rendered = emit_report(in);
        write_file(o / "report.md", rendered.markdown);
        write_file(o / "report.json", rendered.json);
      };
    }
    return s;
  }

  nlohmann::ordered_json engine_params() const {
    return {{"mode", cfg_.engine_mode},
            {"endpoint", cfg_.engine.endpoint},
            {"model", cfg_.engine.model_name},
            {"temperature", cfg_.engine.temperature},
            {"seed", cfg_.engine.seed}};
  }

  void run_stage(const std::string& stage) {
    auto spec = spec_for(stage);
    StageRecord rec;
    rec.stage = stage;
    for (const auto& in : spec.inputs) {
      if (!std::filesystem::exists(in)) {
        throw stage_error(stage, "missing input " + display_path(in));
      }
      rec.inputs.push_back({display_path(in), path_digest(in)});
    }
    nlohmann::ordered_json key_doc;
    key_doc["stage"] = stage;
    key_doc["params"] = spec.params;
    key_doc["inputs"] = Manifest::artifacts_json(rec.inputs);
    rec.key = sha256_hex(key_doc.dump());

    if (previous_) {
      if (const auto* old = previous_->find(stage); old && old->key == rec.key && outputs_intact(*old)) {
        result_.skipped.push_back(stage);
        note(stage + ": up to date");
        return;
      }
    }

    rec.started = run_timestamp(cfg_);
    try {
      spec.body();
    } catch (const config_error&) {
      throw;
    } catch (const stage_error&) {
      throw;
    } catch (const std::exception& e) {
      throw stage_error(stage, e.what());
    }
    rec.finished = run_timestamp(cfg_);
    for (const auto& o : spec.outputs) rec.outputs.push_back({o, file_digest(out() / o)});
    result_.manifest.upsert(std::move(rec));
    result_.ran.push_back(stage);
    write_file(out() / "manifest.json", result_.manifest.to_string());
    note(stage + ": done");
  }

  bool outputs_intact(const StageRecord& rec) const {
    for (const auto& o : rec.outputs) {
      const auto p = out() / o.path;
      if (!std::filesystem::exists(p) || file_digest(p) != o.digest) return false;
    }
    return true;
  }

  RunConfig cfg_;
  std::ostream* log_;
  std::optional<Manifest> previous_;
  PipelineResult result_;
  std::unique_ptr<genengine::EngineClient> client_;
  std::optional<genengine::PromptSet> prompts_;
};

inline PipelineResult run_pipeline(const RunConfig& cfg, const std::string& until = "report",
                                   std::ostream* log = nullptr) {
  return Pipeline(cfg, log).run(until);
}

}  // namespace geo::harness
