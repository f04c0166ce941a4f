#pragma once

// Splitting a generated answer into sentences and reading the numeric
// citation markers attached to each one.

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/common/text.hpp"

namespace geo::visibility {

inline constexpr int kMaxSources = 5;

inline const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> k = {"e.g.", "i.e.", "etc.", "vs.",  "dr.", "mr.",  "mrs.", "ms.",
                                             "st.",  "mt.",  "no.",  "prof.", "jr.", "sr.", "approx.", "u.s.",
                                             "ca.",  "cf.",  "fig.", "inc.", "ltd."};
  return k;
}

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

/// Parses the body of a bracket group ("1", "1, 3", "2-4"). Returns nullopt
/// unless the whole body is a list of integers and integer ranges.
inline std::optional<std::vector<std::pair<long, long>>> parse_citation_body(std::string_view body) {
  std::vector<std::pair<long, long>> ranges;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < body.size() && text::is_space(body[i])) ++i;
  };
  auto read_int = [&]() -> std::optional<long> {
    skip_ws();
    std::size_t start = i;
    while (i < body.size() && is_digit(body[i]) && i - start < 9) ++i;
    if (i == start || (i < body.size() && is_digit(body[i]))) return std::nullopt;
    return std::stol(std::string(body.substr(start, i - start)));
  };
  while (true) {
    auto lo = read_int();
    if (!lo) return std::nullopt;
    long hi = *lo;
    skip_ws();
    if (i < body.size() && body[i] == '-') {
      ++i;
      auto h = read_int();
      if (!h) return std::nullopt;
      hi = *h;
    } else if (body.compare(i, 3, "\xE2\x80\x93") == 0) {  // en dash
      i += 3;
      auto h = read_int();
      if (!h) return std::nullopt;
      hi = *h;
    }
    if (hi < *lo) return std::nullopt;
    ranges.emplace_back(*lo, hi);
    skip_ws();
    if (i == body.size()) return ranges;
    if (body[i] != ',') return std::nullopt;
    ++i;
  }
}

/// Finds the next citation group at or after `from`. Returns [open, close]
/// byte positions or nullopt.
inline std::optional<std::pair<std::size_t, std::size_t>> next_citation_group(std::string_view s, std::size_t from) {
  for (std::size_t open = s.find('[', from); open != std::string_view::npos; open = s.find('[', open + 1)) {
    const std::size_t close = s.find(']', open + 1);
    if (close == std::string_view::npos) return std::nullopt;
    if (parse_citation_body(s.substr(open + 1, close - open - 1))) return std::make_pair(open, close);
  }
  return std::nullopt;
}

}  // namespace detail

struct CitationParse {
  std::set<int> indices;
  std::vector<long> ignored;  // parsed but outside 1..max_source
};

/// All bracketed numeric groups: [2], [1][3], [1, 3], [1-3]. Indices outside
/// 1..max_source are dropped and reported in `ignored`.
inline CitationParse extract_citations(std::string_view sentence, int max_source = kMaxSources) {
  CitationParse out;
  std::size_t pos = 0;
  while (auto group = detail::next_citation_group(sentence, pos)) {
    const auto [open, close] = *group;
    const auto ranges = detail::parse_citation_body(sentence.substr(open + 1, close - open - 1));
    for (const auto& [lo, hi] : *ranges) {
      for (long v = lo; v <= hi; ++v) {
        if (v >= 1 && v <= max_source) {
          out.indices.insert(static_cast<int>(v));
        } else {
          out.ignored.push_back(v);
          if (v > max_source) break;
        }
      }
    }
    pos = close + 1;
  }
  return out;
}

/// `sentence` with every citation group removed.
inline std::string strip_citations(std::string_view sentence) {
  std::string out;
  std::size_t pos = 0;
  while (auto group = detail::next_citation_group(sentence, pos)) {
    out.append(sentence.substr(pos, group->first - pos));
    out.push_back(' ');
    pos = group->second + 1;
  }
  out.append(sentence.substr(pos));
  return out;
}

/// Words are whitespace-separated tokens, after citation markers are removed,
/// that contain at least one letter, digit or non-ASCII byte.
inline std::size_t count_words(std::string_view sentence) {
  std::size_t n = 0;
  const std::string stripped = strip_citations(sentence);
  for (auto tok : text::split_whitespace(stripped)) {
    if (std::any_of(tok.begin(), tok.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80;
        })) {
      ++n;
    }
  }
  return n;
}

/// Splits on '.', '!' or '?' followed by whitespace or end of text, and on
/// line breaks. A '.' that ends a listed abbreviation does not split.
/// Citation groups that directly follow a terminator ("warm. [2]") stay with
/// the sentence they close. Empty segments are dropped.
inline std::vector<std::string> segment_sentences(std::string_view answer,
                                                  const std::vector<std::string>& abbreviations = default_abbreviations()) {
  std::vector<std::string> out;
  auto emit = [&](std::size_t begin, std::size_t end) {
    auto seg = text::trim(answer.substr(begin, end - begin));
    if (!seg.empty()) out.emplace_back(seg);
  };
  auto is_abbreviation = [&](std::size_t dot) {
    std::size_t start = dot;
    while (start > 0 && !text::is_space(answer[start - 1])) --start;
    const std::string word = text::ascii_lower(answer.substr(start, dot + 1 - start));
    for (const auto& a : abbreviations) {
      if (word == a || (word.size() > a.size() && word.ends_with(a) && !std::isalnum(static_cast<unsigned char>(word[word.size() - a.size() - 1])))) {
        return true;
      }
    }
    return false;
  };

  std::size_t begin = 0;
  std::size_t i = 0;
  while (i < answer.size()) {
    const char c = answer[i];
    if (c == '\n') {
      emit(begin, i);
      begin = ++i;
      continue;
    }
    const bool terminator = c == '.' || c == '!' || c == '?';
    if (!terminator || (i + 1 < answer.size() && !text::is_space(answer[i + 1]))) {
      ++i;
      continue;
    }
    if (c == '.' && is_abbreviation(i)) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    // Trailing citation groups, e.g. "Sentence. [2][3]".
    while (true) {
      std::size_t j = end;
      while (j < answer.size() && (answer[j] == ' ' || answer[j] == '\t')) ++j;
      if (j >= answer.size() || answer[j] != '[') break;
      auto group = detail::next_citation_group(answer, j);
      if (!group || group->first != j) break;
      end = group->second + 1;
    }
    emit(begin, end);
    begin = i = end;
  }
  emit(begin, answer.size());
  return out;
}

struct Sentence {
  std::string text;
  std::size_t pos = 0;
  std::size_t word_count = 0;
  std::set<int> citations;
};

struct ParsedResponse {
  std::vector<Sentence> sentences;
  std::size_t total() const { return sentences.size(); }
  std::size_t total_words() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.word_count;
    return n;
  }
};

inline ParsedResponse parse_response(std::string_view answer, int max_source = kMaxSources) {
  ParsedResponse r;
  for (auto& text : segment_sentences(answer)) {
    Sentence s;
    s.pos = r.sentences.size();
    s.word_count = count_words(text);
    s.citations = extract_citations(text, max_source).indices;
    s.text = std::move(text);
    r.sentences.push_back(std::move(s));
  }
  return r;
}

}  // namespace geo::visibility
