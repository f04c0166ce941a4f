#pragma once

// Best-effort visible-text extraction from HTML.
//
// This is a tolerant single-pass tokenizer, not a conforming HTML5 parser.
// Malformed markup never throws; unknown constructs degrade to text or are
// skipped. Output paragraphs are separated by '\n' and whitespace inside a
// paragraph is collapsed to single spaces.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "geo/common/text.hpp"
#include "geo/common/utf8.hpp"

namespace geo::corpus {

/// Deny-lists that decide which subtrees count as boilerplate.
struct ExtractConfig {
  /// Elements whose whole subtree is dropped.
  std::unordered_set<std::string> drop_tags = {"head",   "nav",    "footer", "header", "aside",
                                               "form",   "button", "select", "iframe", "svg",
                                               "canvas", "noscript", "template", "dialog"};
  /// A class or id token containing any of these substrings marks boilerplate.
  std::vector<std::string> class_substrings = {
      "nav",    "menu",    "footer",  "sidebar",    "social",     "share",  "cookie",
      "advert", "banner",  "promo",   "newsletter", "breadcrumb", "popup",  "subscribe",
      "sponsor", "related-posts", "widget"};
  /// Tokens matched exactly or as a "<token>-" / "<token>_" prefix ("ad" would be too greedy as a substring).
  std::vector<std::string> class_prefixes = {"ad", "ads"};
  std::unordered_set<std::string> drop_roles = {"navigation", "banner",  "contentinfo", "complementary",
                                                "search",     "menu",    "menubar",     "dialog"};
};

namespace detail {

inline const std::unordered_set<std::string>& raw_text_tags() {
  static const std::unordered_set<std::string> k = {"script", "style", "textarea", "xmp"};
  return k;
}

inline const std::unordered_set<std::string>& void_tags() {
  static const std::unordered_set<std::string> k = {"area", "base", "br",    "col",   "embed",
                                                    "hr",   "img",  "input", "link",  "meta",
                                                    "param", "source", "track", "wbr"};
  return k;
}

inline const std::unordered_set<std::string>& block_tags() {
  static const std::unordered_set<std::string> k = {
      "address", "article", "blockquote", "br",     "dd",      "div",   "dl",      "dt",
      "fieldset", "figcaption", "figure", "h1",    "h2",      "h3",    "h4",      "h5",
      "h6",      "hr",      "li",         "main",   "ol",      "p",     "pre",     "section",
      "table",   "tbody",   "td",         "th",     "thead",   "tr",    "ul",      "title",
      "body",    "html",    "caption",    "details", "summary"};
  return k;
}

inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':' || c == '_';
}

struct Tag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::vector<std::pair<std::string, std::string>> attributes;
};

/// Parses a tag starting at `pos` (which points at '<'). Returns the index one
/// past the closing '>' (or end of input for an unterminated tag).
inline std::size_t parse_tag(std::string_view s, std::size_t pos, Tag& tag) {
  std::size_t i = pos + 1;
  if (i < s.size() && s[i] == '/') {
    tag.closing = true;
    ++i;
  }
  std::size_t start = i;
  while (i < s.size() && is_name_char(s[i])) ++i;
  tag.name = text::ascii_lower(s.substr(start, i - start));
  while (i < s.size() && s[i] != '>') {
    if (text::is_space(s[i])) {
      ++i;
      continue;
    }
    if (s[i] == '/') {
      tag.self_closing = true;
      ++i;
      continue;
    }
    std::size_t name_start = i;
    while (i < s.size() && !text::is_space(s[i]) && s[i] != '=' && s[i] != '>' && s[i] != '/') ++i;
    std::string attr = text::ascii_lower(s.substr(name_start, i - name_start));
    if (i == name_start) {  // stray character such as a lone quote
      ++i;
      continue;
    }
    tag.self_closing = false;
    while (i < s.size() && text::is_space(s[i])) ++i;
    std::string value;
    if (i < s.size() && s[i] == '=') {
      ++i;
      while (i < s.size() && text::is_space(s[i])) ++i;
      if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
        char q = s[i++];
        std::size_t vstart = i;
        while (i < s.size() && s[i] != q) ++i;
        value = std::string(s.substr(vstart, i - vstart));
        if (i < s.size()) ++i;
      } else {
        std::size_t vstart = i;
        while (i < s.size() && !text::is_space(s[i]) && s[i] != '>') ++i;
        value = std::string(s.substr(vstart, i - vstart));
      }
    }
    tag.attributes.emplace_back(std::move(attr), std::move(value));
  }
  return i < s.size() ? i + 1 : s.size();
}

/// Finds the case-insensitive `</name` that ends a raw-text element and
/// returns the index past its '>'.
inline std::size_t skip_raw_text(std::string_view s, std::size_t pos, const std::string& name) {
  const std::string needle = "</" + name;
  for (std::size_t i = pos; i < s.size(); ++i) {
    if (s[i] == '<' && text::iequals_prefix(s, i, needle)) {
      std::size_t close = s.find('>', i);
      return close == std::string_view::npos ? s.size() : close + 1;
    }
  }
  return s.size();
}

inline void append_entity(std::string_view s, std::size_t& i, std::string& out) {
  // s[i] == '&'
  std::size_t semi = s.find(';', i);
  if (semi == std::string_view::npos || semi - i > 10) {
    out.push_back('&');
    ++i;
    return;
  }
  std::string_view body = s.substr(i + 1, semi - i - 1);
  char32_t cp = 0;
  bool ok = false;
  if (!body.empty() && body[0] == '#') {
    std::uint32_t v = 0;
    bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
    std::string_view digits = body.substr(hex ? 2 : 1);
    ok = !digits.empty();
    for (char c : digits) {
      int d = -1;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
      else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
      if (d < 0 || v > 0x10FFFF) {
        ok = false;
        break;
      }
      v = v * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
    }
    cp = v;
  } else {
    static const std::pair<std::string_view, char32_t> kNamed[] = {
        {"amp", U'&'},      {"lt", U'<'},       {"gt", U'>'},       {"quot", U'"'},
        {"apos", U'\''},    {"nbsp", U' '},     {"ndash", U'–'}, {"mdash", U'—'},
        {"hellip", U'…'}, {"copy", U'©'}, {"reg", U'®'}, {"lsquo", U'‘'},
        {"rsquo", U'’'}, {"ldquo", U'“'}, {"rdquo", U'”'}, {"euro", U'€'},
        {"pound", U'£'}, {"deg", U'°'}};
    for (const auto& [name, value] : kNamed) {
      if (body == name) {
        cp = value;
        ok = true;
        break;
      }
    }
  }
  if (!ok) {
    out.push_back('&');
    ++i;
    return;
  }
  if (cp == 0xA0) cp = U' ';
  utf8::append_codepoint(out, cp);
  i = semi + 1;
}

/// Removes every case-insensitive "<script" / "<style" opener that entity
/// decoding may have produced inside text.
inline void strip_markup_openers(std::string& s) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '<' && (text::iequals_prefix(s, i, "<script") || text::iequals_prefix(s, i, "<style"))) {
        s.erase(i, 1);
        changed = true;
      }
    }
  }
}

}  // namespace detail

/// True if the element described by `tag` starts a boilerplate subtree.
inline bool is_boilerplate(const detail::Tag& tag, const ExtractConfig& cfg) {
  if (cfg.drop_tags.contains(tag.name)) return true;
  for (const auto& [name, value] : tag.attributes) {
    if (name == "role" && cfg.drop_roles.contains(text::ascii_lower(text::trim(value)))) return true;
    if (name == "aria-hidden" && text::ascii_lower(value) == "true") return true;
    if (name == "hidden") return true;
    if (name != "class" && name != "id") continue;
    for (auto token : text::split_whitespace(value)) {
      const std::string lower = text::ascii_lower(token);
      for (const auto& sub : cfg.class_substrings) {
        if (lower.find(sub) != std::string::npos) return true;
      }
      for (const auto& p : cfg.class_prefixes) {
        if (lower == p) return true;
        if (lower.size() > p.size() && lower.compare(0, p.size(), p) == 0 &&
            (lower[p.size()] == '-' || lower[p.size()] == '_')) {
          return true;
        }
      }
    }
  }
  return false;
}

/// Extracts visible, non-boilerplate text from `raw_payload`.
inline std::string extract_text(std::string_view raw_payload, const ExtractConfig& cfg = {}) {
  struct Open {
    std::string name;
    bool suppressed;
  };
  std::vector<Open> stack;
  std::size_t suppressed = 0;
  std::vector<std::string> paragraphs;
  std::string current;

  auto flush = [&] {
    std::string para = text::collapse_whitespace(current);
    current.clear();
    if (!para.empty()) paragraphs.push_back(std::move(para));
  };

  const std::string_view s = raw_payload;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '<') {
      if (s.compare(i, 4, "<!--") == 0) {
        std::size_t end = s.find("-->", i + 4);
        i = end == std::string_view::npos ? s.size() : end + 3;
        continue;
      }
      if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
        std::size_t end = s.find('>', i);
        i = end == std::string_view::npos ? s.size() : end + 1;
        continue;
      }
      const bool closing = i + 1 < s.size() && s[i + 1] == '/';
      const std::size_t name_pos = i + (closing ? 2 : 1);
      if (name_pos >= s.size() || !std::isalpha(static_cast<unsigned char>(s[name_pos]))) {
        if (suppressed == 0) current.push_back(c);
        ++i;
        continue;
      }
      detail::Tag tag;
      i = detail::parse_tag(s, i, tag);
      const bool block = detail::block_tags().contains(tag.name);
      if (tag.closing) {
        auto it = std::find_if(stack.rbegin(), stack.rend(), [&](const Open& o) { return o.name == tag.name; });
        if (it != stack.rend()) {
          const auto keep = static_cast<std::size_t>(stack.rend() - it) - 1;
          while (stack.size() > keep) {
            if (stack.back().suppressed) --suppressed;
            stack.pop_back();
          }
        }
        if (block) flush();
        continue;
      }
      if (detail::raw_text_tags().contains(tag.name)) {
        if (!tag.self_closing) i = detail::skip_raw_text(s, i, tag.name);
        continue;
      }
      if (block) flush();
      if (detail::void_tags().contains(tag.name) || tag.self_closing) continue;
      const bool drop = is_boilerplate(tag, cfg);
      stack.push_back({tag.name, drop});
      if (drop) ++suppressed;
      continue;
    }
    if (suppressed > 0) {
      ++i;
      continue;
    }
    if (c == '&') {
      detail::append_entity(s, i, current);
      continue;
    }
    current.push_back(c);
    ++i;
  }
  flush();
  std::string out = text::join(paragraphs, "\n");
  detail::strip_markup_openers(out);
  return out;
}

}  // namespace geo::corpus
