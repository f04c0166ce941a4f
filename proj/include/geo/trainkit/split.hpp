#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/common/rng.hpp"
#include "geo/trainkit/bins.hpp"

namespace geo::trainkit {

enum class Membership { train, validation, test };

inline std::string_view to_string(Membership m) {
  switch (m) {
    case Membership::train: return "train";
    case Membership::validation: return "validation";
    case Membership::test: return "test";
  }
  return "train";
}

inline Membership parse_membership(std::string_view s) {
  if (s == "train") return Membership::train;
  if (s == "validation") return Membership::validation;
  if (s == "test") return Membership::test;
  throw format_error("unknown membership '" + std::string(s) + "'");
}

struct SplitItem {
  std::string id;
  std::string query_id;
  std::size_t length = 0;
};

struct SplitAssignment {
  LengthBins bins;
  std::map<std::string, Membership> membership;
  std::map<std::string, std::size_t> bin_index;
  std::uint64_t seed = 0;

  std::size_t count(Membership m) const {
    std::size_t n = 0;
    for (const auto& [id, mm] : membership) n += mm == m;
    return n;
  }

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

inline std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9)); }

/// Per-bin seeded shuffle; the first round_half_up(f * n_bin) items of each
/// bin go to train, the rest to validation. Bins are visited in index order
/// and share one RNG stream.
inline SplitAssignment stratified_split(const std::vector<SplitItem>& items, const LengthBins& bins,
                                        double train_fraction, std::uint64_t seed) {
  if (train_fraction < 0.0 || train_fraction > 1.0) throw precondition_error("train_fraction must be in [0,1]");
  SplitAssignment out;
  out.bins = bins;
  out.seed = seed;
  std::vector<std::vector<const SplitItem*>> per_bin(bins.bin_count());
  for (const auto& item : items) {
    const std::size_t b = bins.bin_of(item.length);
    per_bin[b].push_back(&item);
    out.bin_index[item.id] = b;
  }
  Rng rng(seed);
  for (auto& members : per_bin) {
    rng.shuffle(std::span(members));
    const std::size_t n_train = round_half_up(train_fraction * static_cast<double>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i) {
      out.membership[members[i]->id] = i < n_train ? Membership::train : Membership::validation;
    }
  }
  return out;
}

struct HoldOut {
  std::vector<std::string> query_ids;
  std::vector<std::string> item_ids;
};

/// Picks `n_queries` queries with at least `docs_per_query` items each and
/// returns their first `docs_per_query` items.
inline HoldOut hold_out_test(const std::vector<std::string>& query_ids, const std::vector<SplitItem>& items,
                             std::size_t docs_per_query, std::size_t n_queries, std::uint64_t seed) {
  std::map<std::string, std::vector<const SplitItem*>> by_query;
  for (const auto& item : items) by_query[item.query_id].push_back(&item);
  std::vector<std::string> eligible;
  for (const auto& q : query_ids) {
    auto it = by_query.find(q);
    if (it != by_query.end() && it->second.size() >= docs_per_query) eligible.push_back(q);
  }
  if (eligible.size() < n_queries) {
    throw precondition_error("hold_out_test: need " + std::to_string(n_queries) + ", have " +
                             std::to_string(eligible.size()));
  }
  Rng rng(seed);
  rng.shuffle(std::span(eligible));
  HoldOut out;
  out.query_ids.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(n_queries));
  for (const auto& q : out.query_ids) {
    const auto& docs = by_query[q];
    for (std::size_t i = 0; i < docs_per_query; ++i) out.item_ids.push_back(docs[i]->id);
  }
  return out;
}

struct SplitConfig {
  std::size_t bins = 10;
  double train_fraction = 0.8;
  std::size_t test_queries = 50;
  std::size_t docs_per_query = 5;
  std::uint64_t seed = 0;
};

/// Full split: query-level test hold-out first, then length-stratified
/// train/validation over what remains. Every item of a held-out query is
/// test, so no query straddles test and train/validation.
inline SplitAssignment make_split(const std::vector<SplitItem>& items, const SplitConfig& cfg) {
  std::vector<std::string> query_order;
  std::set<std::string> seen;
  for (const auto& i : items) {
    if (seen.insert(i.query_id).second) query_order.push_back(i.query_id);
  }
  std::set<std::string> test_queries;
  if (cfg.test_queries > 0) {
    auto held = hold_out_test(query_order, items, cfg.docs_per_query, cfg.test_queries, cfg.seed);
    test_queries.insert(held.query_ids.begin(), held.query_ids.end());
  }
  std::vector<SplitItem> pool;
  std::vector<std::size_t> pool_lengths;
  for (const auto& i : items) {
    if (!test_queries.contains(i.query_id)) {
      pool.push_back(i);
      pool_lengths.push_back(i.length);
    }
  }
  if (pool.empty()) throw precondition_error("make_split: no items left for train/validation");
  auto bins = make_length_bins(pool_lengths, cfg.bins);
  // Offset the stream so the stratified shuffle is not correlated with the hold-out shuffle.
  auto out = stratified_split(pool, bins, cfg.train_fraction, cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  out.seed = cfg.seed;
  for (const auto& i : items) {
    if (test_queries.contains(i.query_id)) {
      out.membership[i.id] = Membership::test;
      out.bin_index[i.id] = bins.bin_of(i.length);
    }
  }
  return out;
}

/// Split manifest, JSON Lines. First line:
///   {"type":"header","seed":N,"bins":k,"edges":[...],"degenerate":b}
/// then one line per item, sorted by id:
///   {"type":"item","id":"...","bin":i,"membership":"train|validation|test"}
inline std::string format_split_manifest(const SplitAssignment& split) {
  std::string out;
  nlohmann::ordered_json header;
  header["type"] = "header";
  header["seed"] = split.seed;
  header["bins"] = split.bins.bin_count();
  header["edges"] = split.bins.edges;
  header["degenerate"] = split.bins.degenerate;
  out += header.dump() + "\n";
  for (const auto& [id, m] : split.membership) {
    nlohmann::ordered_json rec;
    rec["type"] = "item";
    rec["id"] = id;
    rec["bin"] = split.bin_index.at(id);
    rec["membership"] = std::string(to_string(m));
    out += rec.dump() + "\n";
  }
  return out;
}

inline SplitAssignment parse_split_manifest(std::string_view doc) {
  SplitAssignment out;
  std::istringstream in{std::string(doc)};
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        out.seed = j.at("seed").get<std::uint64_t>();
        out.bins.edges = j.at("edges").get<std::vector<std::size_t>>();
        out.bins.degenerate = j.at("degenerate").get<bool>();
        have_header = true;
      } else if (type == "item") {
        if (!have_header) throw format_error(row, "item before header");
        const auto id = j.at("id").get<std::string>();
        out.membership[id] = parse_membership(j.at("membership").get<std::string>());
        out.bin_index[id] = j.at("bin").get<std::size_t>();
      } else {
        throw format_error(row, "unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw format_error(row, e.what());
    }
  }
  if (!have_header) throw format_error("split manifest has no header record");
  return out;
}

}  // namespace geo::trainkit
