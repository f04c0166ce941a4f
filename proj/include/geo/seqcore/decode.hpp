#pragma once

// Beam search with a length penalty and no-repeat n-gram blocking.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/seqcore/dims.hpp"

namespace geo::seqcore {

struct DecodeConfig {
  std::size_t max_in = 384;
  std::size_t max_out = 384;
  double length_penalty_alpha = 1.1;
  std::size_t no_repeat_ngram = 3;
  std::size_t beam_width = 4;

  /// Fine-tuned configuration: 384-token encoder window, decoder capped at the same length.
  static DecodeConfig proposed() { return {384, 384, 1.1, 3, 4}; }
  /// Reference configuration: 256-token encoder window, 448-token decoder cap.
  static DecodeConfig baseline() { return {256, 448, 1.1, 3, 4}; }

  void validate() const {
    if (max_in == 0 || max_out == 0) throw precondition_error("decode windows must be >= 1");
    if (!(length_penalty_alpha > 0)) throw precondition_error("length penalty alpha must be > 0");
    if (no_repeat_ngram == 0) throw precondition_error("no_repeat_ngram must be >= 1");
    if (beam_width == 0) throw precondition_error("beam_width must be >= 1");
  }
};

/// Encoder input truncated to the configured window.
inline std::vector<TokenId> truncate_input(std::span<const TokenId> ids, const DecodeConfig& cfg) {
  return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), cfg.max_in))};
}

/// Full-vocabulary natural-log distribution over the next token given a prefix.
using NextTokenScorer = std::function<std::vector<double>(std::span<const TokenId> prefix)>;

/// Sum of log-probabilities divided by length^alpha.
inline double length_normalized_score(double sum_logprob, std::size_t length, double alpha) {
  return sum_logprob / std::pow(static_cast<double>(length), alpha);
}

/// Tokens that would complete an n-gram already present in `prefix`.
inline std::set<TokenId> banned_next_tokens(std::span<const TokenId> prefix, std::size_t n) {
  std::set<TokenId> banned;
  if (n == 0 || prefix.size() + 1 < n) return banned;
  const std::size_t ctx = n - 1;
  const auto suffix = prefix.subspan(prefix.size() - ctx, ctx);
  for (std::size_t i = 0; i + n <= prefix.size(); ++i) {
    if (std::equal(suffix.begin(), suffix.end(), prefix.begin() + static_cast<std::ptrdiff_t>(i))) {
      banned.insert(prefix[i + ctx]);
    }
  }
  return banned;
}

struct DecodeResult {
  std::vector<TokenId> tokens;  // end marker stripped
  double sum_logprob = 0.0;
  double score = 0.0;           // length-normalised
  bool ended = false;           // stopped on the end marker rather than max_out
};

/// Beam search.
///
/// Candidates are ranked by length-normalised score. A candidate whose token
/// is `end_id` becomes a finished hypothesis if it ranks inside the beam.
/// Search stops when beam_width hypotheses have finished, no live beam
/// remains, or max_out tokens (end marker included) were emitted.
inline DecodeResult decode(const NextTokenScorer& scorer, TokenId end_id, const DecodeConfig& cfg) {
  cfg.validate();
  struct Hyp {
    std::vector<TokenId> tokens;
    double sum = 0.0;
    bool ended = false;
  };
  struct Candidate {
    std::size_t beam;
    TokenId token;
    double sum;
  };
  std::vector<Hyp> live{Hyp{}};
  std::vector<Hyp> finished;
  std::size_t vocab = 0;

  for (std::size_t step = 0; step < cfg.max_out && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < live.size(); ++b) {
      const auto logprobs = scorer(live[b].tokens);
      if (logprobs.empty()) throw precondition_error("decode: scorer returned an empty distribution");
      if (vocab == 0) vocab = logprobs.size();
      if (logprobs.size() != vocab) throw precondition_error("decode: scorer changed vocabulary size");
      const auto banned = banned_next_tokens(live[b].tokens, cfg.no_repeat_ngram);
      std::size_t added = 0;
      for (std::size_t t = 0; t < vocab; ++t) {
        const double lp = logprobs[t];
        if (std::isnan(lp) || lp > 0.0) {
          throw precondition_error("decode: scorer returned a positive or NaN log-probability");
        }
        const auto token = static_cast<TokenId>(t);
        if (std::isinf(lp) || banned.contains(token)) continue;
        candidates.push_back({b, token, live[b].sum + lp});
        ++added;
      }
      // Every continuation blocked: the hypothesis ends where it is.
      if (added == 0 && !live[b].tokens.empty()) finished.push_back(live[b]);
    }
    const std::size_t length = step + 1;
    std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& c) {
      return length_normalized_score(a.sum, length, cfg.length_penalty_alpha) >
             length_normalized_score(c.sum, length, cfg.length_penalty_alpha);
    });
    std::vector<Hyp> next;
    for (std::size_t rank = 0; rank < candidates.size() && next.size() < cfg.beam_width; ++rank) {
      const auto& c = candidates[rank];
      Hyp h{live[c.beam].tokens, c.sum, false};
      h.tokens.push_back(c.token);
      if (c.token == end_id) {
        if (rank < cfg.beam_width) {
          h.ended = true;
          finished.push_back(std::move(h));
        }
        continue;
      }
      next.push_back(std::move(h));
    }
    live = std::move(next);
    if (finished.size() >= cfg.beam_width) {
      live.clear();
      break;
    }
  }
  for (auto& h : live) finished.push_back(std::move(h));
  if (finished.empty()) return {};

  const Hyp* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& h : finished) {
    const double s = length_normalized_score(h.sum, h.tokens.size(), cfg.length_penalty_alpha);
    if (!best || s > best_score) {
      best = &h;
      best_score = s;
    }
  }
  DecodeResult out{best->tokens, best->sum, best_score, best->ended};
  if (out.ended && !out.tokens.empty()) out.tokens.pop_back();
  return out;
}

}  // namespace geo::seqcore
