#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>

#include "geo/common/text.hpp"
#include "geo/corpus/types.hpp"

namespace geo::corpus {

inline constexpr std::size_t kMinChars = 100;

/// Lowercased host of a URL ("https://www.x.com:8080/a" -> "www.x.com").
inline std::string url_host(std::string_view url) {
  std::size_t start = url.find("://");
  start = start == std::string_view::npos ? 0 : start + 3;
  std::size_t end = url.find_first_of("/?#", start);
  std::string_view authority = url.substr(start, end == std::string_view::npos ? url.npos : end - start);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (auto colon = authority.find(':'); colon != std::string_view::npos) authority = authority.substr(0, colon);
  return text::ascii_lower(authority);
}

/// A host matches a listed domain exactly or as a subdomain of it.
inline bool host_listed(std::string_view host, const std::set<std::string>& domains) {
  for (const auto& d : domains) {
    if (host == d) return true;
    if (host.size() > d.size() && host.ends_with(d) && host[host.size() - d.size() - 1] == '.') return true;
  }
  return false;
}

inline bool fetch_denied(int http_status) {
  return http_status == 0 || http_status == 401 || http_status == 403 || http_status == 429 ||
         http_status == 451;
}

/// Status gate for an extracted document.
/// Precedence: excluded_domain > blocked > too_short > usable.
inline DocStatus quality_filter(const WebDocument& doc, const std::set<std::string>& excluded_domains,
                                std::size_t min_chars = kMinChars) {
  if (host_listed(url_host(doc.url), excluded_domains)) return DocStatus::excluded_domain;
  if (fetch_denied(doc.http_status)) return DocStatus::blocked;
  if (doc.char_count < min_chars) return DocStatus::too_short;
  return DocStatus::usable;
}

}  // namespace geo::corpus
