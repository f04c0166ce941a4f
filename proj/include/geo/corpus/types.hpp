#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

#include "geo/common/error.hpp"
#include "geo/common/utf8.hpp"

namespace geo::corpus {

struct QueryRecord {
  std::string id;
  std::string subcategory;
  std::string text;

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

enum class DocStatus { usable, blocked, too_short, excluded_domain };

inline std::string_view to_string(DocStatus s) {
  switch (s) {
    case DocStatus::usable: return "usable";
    case DocStatus::blocked: return "blocked";
    case DocStatus::too_short: return "too_short";
    case DocStatus::excluded_domain: return "excluded_domain";
  }
  return "usable";
}

inline DocStatus parse_status(std::string_view s) {
  if (s == "usable") return DocStatus::usable;
  if (s == "blocked") return DocStatus::blocked;
  if (s == "too_short") return DocStatus::too_short;
  if (s == "excluded_domain") return DocStatus::excluded_domain;
  throw format_error("unknown document status '" + std::string(s) + "'");
}

/// One fetched search result. `http_status` is what the fetcher observed;
/// denial codes (401, 403, 429, 451) or 0 (no response) mark the page blocked.
struct WebDocument {
  std::string query_id;
  std::string url;
  std::string raw_payload;
  std::string extracted_text;
  std::size_t char_count = 0;
  int http_status = 200;
  DocStatus status = DocStatus::usable;

  void set_text(std::string text) {
    extracted_text = std::move(text);
    char_count = utf8::char_count(extracted_text);
  }

  friend bool operator==(const WebDocument&, const WebDocument&) = default;
};

/// A dataset row: raw text w and its optimised rewrite w' for one query.
struct ContentPair {
  std::string query_id;
  std::string url;
  std::string source_text;
  std::optional<std::string> optimized_text;

  friend bool operator==(const ContentPair&, const ContentPair&) = default;
};

inline void to_json(nlohmann::json& j, const QueryRecord& q) {
  j = nlohmann::json{{"id", q.id}, {"subcategory", q.subcategory}, {"text", q.text}};
}

inline void from_json(const nlohmann::json& j, QueryRecord& q) {
  j.at("id").get_to(q.id);
  j.at("subcategory").get_to(q.subcategory);
  j.at("text").get_to(q.text);
}

inline void to_json(nlohmann::json& j, const WebDocument& d) {
  j = nlohmann::json{{"query_id", d.query_id},
                     {"url", d.url},
                     {"raw_payload", d.raw_payload},
                     {"extracted_text", d.extracted_text},
                     {"char_count", d.char_count},
                     {"http_status", d.http_status},
                     {"status", std::string(to_string(d.status))}};
}

inline void from_json(const nlohmann::json& j, WebDocument& d) {
  j.at("query_id").get_to(d.query_id);
  j.at("url").get_to(d.url);
  j.at("raw_payload").get_to(d.raw_payload);
  j.at("extracted_text").get_to(d.extracted_text);
  j.at("char_count").get_to(d.char_count);
  d.http_status = j.value("http_status", 200);
  d.status = parse_status(j.at("status").get<std::string>());
  if (d.char_count != utf8::char_count(d.extracted_text)) {
    throw format_error("char_count does not match extracted_text for " + d.url);
  }
}

}  // namespace geo::corpus
