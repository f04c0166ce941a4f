#pragma once

// The three engine-backed steps: query generation, three-phase content
// optimisation, and cited answer synthesis.

#include <array>
#include <cctype>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/common/text.hpp"
#include "geo/corpus/types.hpp"
#include "geo/genengine/client.hpp"
#include "geo/genengine/prompts.hpp"
#include "geo/visibility/parse.hpp"

namespace geo::genengine {

struct QueryBatch {
  std::vector<corpus::QueryRecord> queries;
  std::vector<std::string> warnings;
};

/// Strips list decoration such as "3. ", "3) ", "- " or "* " from a line.
inline std::string strip_list_marker(std::string_view line) {
  auto t = text::trim(line);
  std::size_t i = 0;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) {
    t.remove_prefix(i + 1);
  } else if (!t.empty() && (t[0] == '-' || t[0] == '*')) {
    t.remove_prefix(1);
  }
  return std::string(text::trim(t));
}

/// Key used for duplicate detection: ASCII case-folded, whitespace collapsed.
inline std::string dedup_key(std::string_view query) { return text::ascii_lower(text::collapse_whitespace(query)); }

/// One completion, one query per line. Empty lines are dropped; exact
/// duplicates (after case-fold and whitespace collapse) keep their first
/// occurrence. Ids are "<id_prefix>-<nn>".
inline QueryBatch generate_queries(const std::string& subcategory, int count, EngineClient& client,
                                   const PromptSet& prompts, const std::string& id_prefix = {}) {
  if (count < 1) throw precondition_error("generate_queries: count must be >= 1");
  const auto prompt = prompts.render("queries", {{"subcategory", subcategory}, {"count", std::to_string(count)}});
  const std::string completion = client.complete(prompt);

  QueryBatch batch;
  std::set<std::string> seen;
  std::size_t duplicates = 0;
  std::size_t pos = 0;
  while (pos <= completion.size() && static_cast<int>(batch.queries.size()) < count) {
    std::size_t eol = completion.find('\n', pos);
    if (eol == std::string::npos) eol = completion.size();
    auto q = strip_list_marker(std::string_view(completion).substr(pos, eol - pos));
    pos = eol + 1;
    if (q.empty()) continue;
    if (!seen.insert(dedup_key(q)).second) {
      ++duplicates;
      continue;
    }
    char id[32];
    std::snprintf(id, sizeof id, "-%02zu", batch.queries.size() + 1);
    batch.queries.push_back({(id_prefix.empty() ? subcategory : id_prefix) + id, subcategory, text::collapse_whitespace(q)});
  }
  if (duplicates > 0) batch.warnings.push_back(std::to_string(duplicates) + " duplicate queries removed");
  if (static_cast<int>(batch.queries.size()) < count) {
    batch.warnings.push_back("requested " + std::to_string(count) + " queries, got " +
                             std::to_string(batch.queries.size()));
  }
  return batch;
}

struct OptimisationTrace {
  static constexpr std::array<const char*, 3> kPhases = {"citations", "fluency", "statistics"};

  std::string input_text;
  std::vector<std::string> phase_outputs;  // one per completed phase
  std::string final_text;                  // phase_outputs[2] when valid
  bool valid = false;
  std::string error;
};

/// Runs citation integration, fluency simplification and statistics
/// placement in sequence, each phase consuming the previous output. A phase
/// that fails or returns empty text invalidates the whole trace.
inline OptimisationTrace optimize_content(const std::string& w, EngineClient& client, const PromptSet& prompts) {
  if (text::trim(w).empty()) throw precondition_error("optimize_content: empty source text");
  OptimisationTrace trace;
  trace.input_text = w;
  std::string current = w;
  for (const char* phase : OptimisationTrace::kPhases) {
    std::string out;
    try {
      out = client.complete(prompts.render(phase, {{"text", wrap_text(current)}}));
    } catch (const engine_error& e) {
      trace.error = std::string(phase) + ": " + e.what();
      return trace;
    }
    if (text::trim(out).empty()) {
      trace.error = std::string(phase) + ": empty response";
      return trace;
    }
    trace.phase_outputs.push_back(out);
    current = std::move(out);
  }
  trace.final_text = current;
  trace.valid = true;
  return trace;
}

/// A source as shown to the answer engine. `optimized` selects w' over w.
struct Source {
  int index = 0;
  corpus::ContentPair pair;
  bool optimized = false;

  const std::string& text() const {
    if (optimized) {
      if (!pair.optimized_text) throw precondition_error("source " + std::to_string(index) + " has no optimised text");
      return *pair.optimized_text;
    }
    return pair.source_text;
  }
};

struct SourceSet {
  corpus::QueryRecord query;
  std::vector<Source> sources;

  static SourceSet from_pairs(corpus::QueryRecord q, const std::vector<corpus::ContentPair>& pairs) {
    SourceSet set{std::move(q), {}};
    for (std::size_t i = 0; i < pairs.size(); ++i) set.sources.push_back({static_cast<int>(i) + 1, pairs[i], false});
    set.validate();
    return set;
  }

  void validate() const {
    if (sources.size() != static_cast<std::size_t>(visibility::kMaxSources)) {
      throw precondition_error("source set needs exactly " + std::to_string(visibility::kMaxSources) +
                               " sources, has " + std::to_string(sources.size()));
    }
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (sources[i].index != static_cast<int>(i) + 1) throw precondition_error("source indices must be 1..5 in order");
    }
  }

  /// "[i]\n<<<SOURCE\n<text>\nSOURCE>>>" blocks separated by blank lines.
  std::string render() const {
    std::string out;
    for (const auto& s : sources) {
      if (!out.empty()) out += "\n\n";
      out += "[" + std::to_string(s.index) + "]\n" + std::string(kSourceOpen) + s.text() + std::string(kSourceClose);
    }
    return out;
  }
};

inline std::string answer_prompt(const SourceSet& set, const PromptSet& prompts) {
  set.validate();
  return prompts.render("answer", {{"query", set.query.text}, {"sources", set.render()}});
}

/// Raw engine answer, unmodified.
inline std::string answer_query(const SourceSet& set, EngineClient& client, const PromptSet& prompts) {
  return client.complete(answer_prompt(set, prompts));
}

}  // namespace geo::genengine
