#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "geo/common/digest.hpp"
#include "geo/common/error.hpp"
#include "geo/corpus/dataset.hpp"
#include "geo/corpus/html_extract.hpp"
#include "geo/corpus/quality.hpp"
#include "geo/corpus/types.hpp"

namespace geo::corpus {

struct FetchResult {
  int http_status = 0;
  std::string body;
};

/// Source of raw pages. Live scraping is out of scope; recorded fixtures
/// implement this.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual FetchResult fetch(const std::string& url) = 0;
};

/// Ranked search results for one query, as recorded in a fixture.
struct ResultList {
  std::string query_id;
  std::vector<std::string> urls;
};

/// Fixture layout:
///   <dir>/queries.jsonl            QueryRecord per line
///   <dir>/results/<query_id>.json  {"query_id", "results": [{"url", "page", "http_status"}]}
///   <dir>/pages/...                raw HTML referenced by "page" (relative to <dir>)
class FixtureFetcher : public Fetcher {
 public:
  explicit FixtureFetcher(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_ / "results")) {
      throw config_error("fixture directory has no results/: " + dir_.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir_ / "results")) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto j = nlohmann::json::parse(read_file(f));
      ResultList list{j.at("query_id").get<std::string>(), {}};
      for (const auto& r : j.at("results")) {
        const auto url = r.at("url").get<std::string>();
        list.urls.push_back(url);
        pages_[url] = {r.value("http_status", 200), r.value("page", std::string{})};
      }
      results_[list.query_id] = std::move(list);
    }
  }

  FetchResult fetch(const std::string& url) override {
    auto it = pages_.find(url);
    if (it == pages_.end()) return {404, {}};
    FetchResult r{it->second.first, {}};
    if (!it->second.second.empty() && r.http_status == 200) r.body = read_file(dir_ / it->second.second);
    return r;
  }

  const ResultList* results_for(const std::string& query_id) const {
    auto it = results_.find(query_id);
    return it == results_.end() ? nullptr : &it->second;
  }

  std::vector<QueryRecord> queries() const {
    return parse_jsonl<QueryRecord>(read_file(dir_ / "queries.jsonl"));
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, ResultList> results_;
  std::map<std::string, std::pair<int, std::string>> pages_;
};

struct IngestConfig {
  std::size_t docs_per_query = 5;
  std::size_t min_chars = kMinChars;
  std::set<std::string> excluded_domains;
  ExtractConfig extract;
};

/// Fetches and gates one document.
inline WebDocument process_document(const std::string& query_id, const std::string& url, const FetchResult& fetched,
                                    const IngestConfig& cfg) {
  WebDocument doc;
  doc.query_id = query_id;
  doc.url = url;
  doc.http_status = fetched.http_status;
  doc.raw_payload = fetched.body;
  doc.set_text(extract_text(doc.raw_payload, cfg.extract));
  doc.status = quality_filter(doc, cfg.excluded_domains, cfg.min_chars);
  return doc;
}

/// Walks each query's ranked results until `docs_per_query` usable documents
/// are collected. Every visited document is returned, usable or not.
inline std::vector<WebDocument> ingest(const std::vector<QueryRecord>& queries,
                                       const std::map<std::string, ResultList>& results, Fetcher& fetcher,
                                       const IngestConfig& cfg) {
  std::vector<WebDocument> docs;
  for (const auto& q : queries) {
    auto it = results.find(q.id);
    if (it == results.end()) continue;
    std::size_t usable = 0;
    for (const auto& url : it->second.urls) {
      if (usable >= cfg.docs_per_query) break;
      auto doc = process_document(q.id, url, fetcher.fetch(url), cfg);
      if (doc.status == DocStatus::usable) ++usable;
      docs.push_back(std::move(doc));
    }
  }
  return docs;
}

inline std::vector<WebDocument> ingest_fixtures(const std::filesystem::path& dir, const IngestConfig& cfg) {
  FixtureFetcher fetcher(dir);
  std::map<std::string, ResultList> results;
  auto queries = fetcher.queries();
  for (const auto& q : queries) {
    if (const auto* r = fetcher.results_for(q.id)) results[q.id] = *r;
  }
  return ingest(queries, results, fetcher, cfg);
}

/// Turns gated documents into dataset rows: usable only, trimmed to
/// `max_chars`, minus any URL on the manual review-exclusion list.
inline std::vector<ContentPair> clean_documents(const std::vector<WebDocument>& docs, std::size_t max_chars,
                                                std::size_t min_chars,
                                                const std::set<std::string>& review_exclusions = {}) {
  std::vector<ContentPair> out;
  for (const auto& d : docs) {
    if (d.status != DocStatus::usable || d.char_count < min_chars) continue;
    if (review_exclusions.contains(d.url)) continue;
    out.push_back({d.query_id, d.url, trim_content(d.extracted_text, max_chars), std::nullopt});
  }
  return out;
}

}  // namespace geo::corpus
