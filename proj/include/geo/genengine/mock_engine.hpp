#pragma once

// Deterministic offline engine. Output is a pure function of (prompt, seed).
//
// The task is read from the prompt's "TASK: <name>" line:
//   queries     reads "SUBCATEGORY:" and "COUNT:" lines; emits COUNT numbered
//               questions "What are the best <subcategory> options in
//               <place> for <audience>?", combinations drawn without
//               replacement in a seeded order.
//   citations   ensures a "## Overview" heading, then inserts
//               " [<Organisation>, <year>]" before the first sentence
//               terminator of the body.
//   fluency     ensures the heading, collapses whitespace per line and
//               applies a small phrase-simplification table.
//   statistics  ensures the heading and inserts ", with <p>% of surveyed
//               travellers rating it highly" before the first terminator.
//   answer      for each source [i] in index order: skip heading lines
//               (starting with '#'), take the first sentence, remove citation
//               groups and terminal punctuation, append " [i]."; sentences are
//               joined by single spaces. Empty sources contribute nothing.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geo/common/digest.hpp"
#include "geo/common/rng.hpp"
#include "geo/common/text.hpp"
#include "geo/genengine/client.hpp"
#include "geo/genengine/prompts.hpp"
#include "geo/visibility/parse.hpp"

namespace geo::genengine {

namespace mock {

inline std::uint64_t hash(std::string_view text, std::uint64_t seed) {
  const auto hex = sha256_hex(std::to_string(seed) + ":" + std::string(text));
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

/// Value following "<key>:" at the start of a line, trimmed.
inline std::string header_value(std::string_view prompt, std::string_view key) {
  std::size_t pos = 0;
  while (pos <= prompt.size()) {
    std::size_t eol = prompt.find('\n', pos);
    if (eol == std::string_view::npos) eol = prompt.size();
    auto line = prompt.substr(pos, eol - pos);
    if (line.starts_with(key) && line.size() > key.size() && line[key.size()] == ':') {
      return std::string(text::trim(line.substr(key.size() + 1)));
    }
    pos = eol + 1;
  }
  return {};
}

inline std::optional<std::string> delimited(std::string_view prompt, std::string_view open, std::string_view close,
                                            std::size_t from = 0) {
  const auto a = prompt.find(open, from);
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = prompt.find(close, a + open.size());
  if (b == std::string_view::npos) return std::nullopt;
  return std::string(prompt.substr(a + open.size(), b - a - open.size()));
}

/// Byte offset of the first sentence terminator ('.', '!', '?' followed by
/// whitespace or end) at or after `from`, or npos.
inline std::size_t first_terminator(std::string_view s, std::size_t from) {
  for (std::size_t i = from; i < s.size(); ++i) {
    const char c = s[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == s.size() || text::is_space(s[i + 1]))) return i;
  }
  return std::string_view::npos;
}

/// Splits off a leading heading line. Returns {heading (may be empty), body}.
inline std::pair<std::string, std::string> split_heading(std::string_view text) {
  const auto t = text::trim(text);
  if (t.starts_with("#")) {
    const auto eol = t.find('\n');
    if (eol == std::string_view::npos) return {std::string(t), {}};
    return {std::string(t.substr(0, eol)), std::string(text::trim(t.substr(eol + 1)))};
  }
  return {{}, std::string(t)};
}

inline std::string with_heading(const std::string& heading, const std::string& body) {
  return (heading.empty() ? std::string("## Overview") : heading) + "\n" + body;
}

inline std::string insert_before_first_terminator(const std::string& body, std::string_view insertion) {
  const auto t = first_terminator(body, 0);
  std::string out = body;
  if (t == std::string::npos) return out + std::string(insertion);
  out.insert(t, insertion);
  return out;
}

inline std::string queries(std::string_view prompt, std::uint64_t seed) {
  static constexpr std::array<std::string_view, 10> kPlaces = {
      "Lisbon", "Kyoto", "Cape Town", "Vancouver", "Marrakech", "Reykjavik", "Hanoi", "Cusco", "Tasmania", "Tuscany"};
  static constexpr std::array<std::string_view, 6> kAudiences = {
      "families", "solo travellers", "couples", "students", "retirees", "first-time visitors"};
  const std::string sub = header_value(prompt, "SUBCATEGORY");
  long count = 0;
  try {
    count = std::stol(header_value(prompt, "COUNT"));
  } catch (const std::exception&) {
    count = 0;
  }
  std::vector<std::pair<std::size_t, std::size_t>> combos;
  for (std::size_t p = 0; p < kPlaces.size(); ++p) {
    for (std::size_t a = 0; a < kAudiences.size(); ++a) combos.emplace_back(p, a);
  }
  Rng rng(hash(sub, seed));
  rng.shuffle(std::span(combos));
  std::string out;
  for (long i = 0; i < count && i < static_cast<long>(combos.size()); ++i) {
    const auto [p, a] = combos[static_cast<std::size_t>(i)];
    out += std::to_string(i + 1) + ". What are the best " + sub + " options in " + std::string(kPlaces[p]) + " for " +
           std::string(kAudiences[a]) + "?\n";
  }
  return out;
}

inline std::string citations(const std::string& input, std::uint64_t seed) {
  static constexpr std::array<std::string_view, 5> kOrgs = {"Travel Research Institute", "Global Tourism Council",
                                                            "Journal of Travel Studies", "World Heritage Review",
                                                            "National Visitor Survey"};
  auto [heading, body] = split_heading(input);
  const auto h = hash(body, seed);
  const std::string marker =
      " [" + std::string(kOrgs[h % kOrgs.size()]) + ", " + std::to_string(2018 + (h / 7) % 6) + "]";
  return with_heading(heading, insert_before_first_terminator(body, marker));
}

inline std::string fluency(const std::string& input) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kPhrases = {{
      {"in order to", "to"},
      {"a large number of", "many"},
      {"due to the fact that", "because"},
      {"utilize", "use"},
      {"at this point in time", "now"},
  }};
  auto [heading, body] = split_heading(input);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t eol = body.find('\n', pos);
    if (eol == std::string::npos) eol = body.size();
    auto line = text::collapse_whitespace(std::string_view(body).substr(pos, eol - pos));
    for (const auto& [from, to] : kPhrases) {
      for (std::size_t at = line.find(from); at != std::string::npos; at = line.find(from, at + to.size())) {
        line.replace(at, from.size(), to);
      }
    }
    if (!line.empty()) lines.push_back(std::move(line));
    pos = eol + 1;
  }
  return with_heading(heading, text::join(lines, "\n"));
}

inline std::string statistics(const std::string& input, std::uint64_t seed) {
  auto [heading, body] = split_heading(input);
  const auto p = 55 + hash(body, seed) % 40;
  return with_heading(heading,
                      insert_before_first_terminator(body, ", with " + std::to_string(p) +
                                                               "% of surveyed travellers rating it highly"));
}

inline std::string first_sentence(std::string_view source) {
  std::string kept;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t eol = source.find('\n', pos);
    if (eol == std::string_view::npos) eol = source.size();
    const auto line = text::trim(source.substr(pos, eol - pos));
    if (!line.empty() && !line.starts_with("#")) {
      kept.append(line);
      kept.push_back('\n');
    }
    pos = eol + 1;
  }
  const auto sentences = visibility::segment_sentences(kept);
  if (sentences.empty()) return {};
  std::string s = text::collapse_whitespace(visibility::strip_citations(sentences.front()));
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' || text::is_space(s.back()))) {
    s.pop_back();
  }
  return s;
}

inline std::string answer(std::string_view prompt) {
  std::vector<std::string> parts;
  for (int i = 1; i <= visibility::kMaxSources; ++i) {
    const std::string open = "[" + std::to_string(i) + "]\n" + std::string(kSourceOpen);
    auto src = delimited(prompt, open, kSourceClose);
    if (!src) continue;
    auto s = first_sentence(*src);
    if (!s.empty()) parts.push_back(s + " [" + std::to_string(i) + "].");
  }
  return text::join(parts, " ");
}

}  // namespace mock

class MockEngine : public Transport {
 public:
  TransportResponse send(const EngineRequest& request) override { return respond(request.prompt, request.seed); }

  static TransportResponse respond(std::string_view prompt, std::uint64_t seed) {
    const std::string task = mock::header_value(prompt, "TASK");
    if (task == "queries") return {TransportResponse::Status::ok, mock::queries(prompt, seed), {}};
    if (task == "answer") return {TransportResponse::Status::ok, mock::answer(prompt), {}};
    auto payload = mock::delimited(prompt, kTextOpen, kTextClose);
    if (!payload) return {TransportResponse::Status::failed, {}, "mock: prompt has no text payload"};
    if (text::trim(*payload).empty()) return {TransportResponse::Status::ok, {}, {}};
    if (task == "citations") return {TransportResponse::Status::ok, mock::citations(*payload, seed), {}};
    if (task == "fluency") return {TransportResponse::Status::ok, mock::fluency(*payload), {}};
    if (task == "statistics") return {TransportResponse::Status::ok, mock::statistics(*payload, seed), {}};
    return {TransportResponse::Status::failed, {}, "mock: unknown task '" + task + "'"};
  }
};

}  // namespace geo::genengine
