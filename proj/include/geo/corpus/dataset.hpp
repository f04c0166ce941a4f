#pragma once

// Dataset persistence.
//
// Dataset table (CSV):
//   * UTF-8, no byte-order mark, records terminated by a single '\n'.
//   * First record is exactly: query_id,url,source_text,optimized_text
//   * A field is wrapped in double quotes iff it contains ',', '"', '\r' or
//     '\n'; embedded quotes are doubled. Newlines inside quoted fields are
//     written verbatim.
//   * An absent optimized_text is an empty field. A present optimized_text is
//     never empty, so the two cannot be confused.
//   * The reader also accepts "\r\n" record terminators.
//
// Intermediate state (JSON Lines): one compact JSON object per line, keys in
// the order query_id, url, raw_payload, extracted_text, char_count,
// http_status, status.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "geo/common/digest.hpp"
#include "geo/common/error.hpp"
#include "geo/corpus/trim.hpp"
#include "geo/corpus/types.hpp"

namespace geo::corpus {

inline constexpr std::string_view kDatasetHeader = "query_id,url,source_text,optimized_text";

namespace csv {

inline void append_field(std::string& out, std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

inline std::string format_record(const std::vector<std::string_view>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    append_field(out, fields[i]);
  }
  out.push_back('\n');
  return out;
}

/// Splits a whole CSV document into records. `row` in errors counts records
/// from 0 (the header).
inline std::vector<std::vector<std::string>> parse(std::string_view doc) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  std::size_t i = 0;
  bool record_open = false;

  auto end_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(fields));
    fields.clear();
    record_open = false;
  };

  while (i < doc.size()) {
    record_open = true;
    if (doc[i] == '"') {
      ++i;
      bool closed = false;
      while (i < doc.size()) {
        if (doc[i] == '"') {
          if (i + 1 < doc.size() && doc[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        field.push_back(doc[i++]);
      }
      if (!closed) throw format_error(records.size(), "unterminated quoted field");
      if (i < doc.size() && doc[i] != ',' && doc[i] != '\n' && doc[i] != '\r') {
        throw format_error(records.size(), "unexpected character after closing quote");
      }
    }
    while (i < doc.size() && doc[i] != ',' && doc[i] != '\n' && doc[i] != '\r') {
      if (doc[i] == '"') throw format_error(records.size(), "stray quote in unquoted field");
      field.push_back(doc[i++]);
    }
    if (i >= doc.size()) break;
    if (doc[i] == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++i;
      if (i == doc.size()) record_open = true;
      continue;
    }
    if (doc[i] == '\r') {
      if (i + 1 >= doc.size() || doc[i + 1] != '\n') throw format_error(records.size(), "bare carriage return");
      ++i;
    }
    ++i;  // '\n'
    end_record();
  }
  if (record_open) end_record();
  return records;
}

}  // namespace csv

inline void validate_pair(const ContentPair& p, std::size_t max_chars = kMaxChars) {
  if (utf8::char_count(p.source_text) > max_chars) {
    throw precondition_error("source_text of " + p.url + " exceeds " + std::to_string(max_chars) + " characters");
  }
  if (p.optimized_text && p.optimized_text->empty()) {
    throw precondition_error("optimized_text of " + p.url + " is present but empty");
  }
}

inline std::string format_dataset(const std::vector<ContentPair>& pairs) {
  std::string out(kDatasetHeader);
  out.push_back('\n');
  for (const auto& p : pairs) {
    validate_pair(p);
    out += csv::format_record({p.query_id, p.url, p.source_text, p.optimized_text.value_or("")});
  }
  return out;
}

inline std::vector<ContentPair> parse_dataset(std::string_view doc) {
  auto records = csv::parse(doc);
  if (records.empty()) throw format_error(0, "missing header");
  if (records[0].size() != 4 || csv::format_record({records[0][0], records[0][1], records[0][2], records[0][3]}) !=
                                    std::string(kDatasetHeader) + "\n") {
    throw format_error(0, "header must be '" + std::string(kDatasetHeader) + "'");
  }
  std::vector<ContentPair> pairs;
  pairs.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& f = records[r];
    if (f.size() != 4) {
      throw format_error(r, "expected 4 fields, found " + std::to_string(f.size()));
    }
    ContentPair p{std::move(f[0]), std::move(f[1]), std::move(f[2]), std::nullopt};
    if (!f[3].empty()) p.optimized_text = std::move(f[3]);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline void store_dataset(const std::vector<ContentPair>& pairs, const std::filesystem::path& path) {
  write_file(path, format_dataset(pairs));
}

inline std::vector<ContentPair> load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

template <typename Record>
std::string format_jsonl(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) {
    out += nlohmann::json(r).dump();
    out.push_back('\n');
  }
  return out;
}

template <typename Record>
std::vector<Record> parse_jsonl(std::string_view doc) {
  std::vector<Record> out;
  std::istringstream in{std::string(doc)};
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<Record>());
    } catch (const nlohmann::json::exception& e) {
      throw format_error(row, e.what());
    } catch (const format_error& e) {
      throw format_error(row, e.what());
    }
  }
  return out;
}

inline void store_documents(const std::vector<WebDocument>& docs, const std::filesystem::path& path) {
  write_file(path, format_jsonl(docs));
}

inline std::vector<WebDocument> load_documents(const std::filesystem::path& path) {
  return parse_jsonl<WebDocument>(read_file(path));
}

}  // namespace geo::corpus
