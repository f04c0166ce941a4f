#pragma once

// The five denoising corruptions, generic over the token type. All of them
// are deterministic given the seed in NoiseSpec.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/common/rng.hpp"

namespace geo::seqcore {

enum class NoiseKind { token_mask, token_delete, text_infill, sentence_permute, document_rotate };

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "token_mask" || s == "mask") return NoiseKind::token_mask;
  if (s == "token_delete" || s == "delete") return NoiseKind::token_delete;
  if (s == "text_infill" || s == "infill") return NoiseKind::text_infill;
  if (s == "sentence_permute" || s == "permute") return NoiseKind::sentence_permute;
  if (s == "document_rotate" || s == "rotate") return NoiseKind::document_rotate;
  throw precondition_error("unknown noise kind '" + std::string(s) + "'");
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::token_mask;
  double rate = 0.15;      // per-token probability (mask, delete) or target coverage (infill)
  double span_mean = 3.0;  // Poisson mean of infill span lengths
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rate >= 0.0 && rate <= 1.0)) throw precondition_error("noise rate must be in [0,1]");
    if (!(span_mean > 0.0)) throw precondition_error("span_mean must be > 0");
  }
};

/// Each token independently becomes `mask` with probability `rate`.
template <typename T>
std::vector<T> mask_tokens(std::span<const T> tokens, const T& mask, double rate, Rng& rng) {
  std::vector<T> out(tokens.begin(), tokens.end());
  for (auto& t : out) {
    if (rng.bernoulli(rate)) t = mask;
  }
  return out;
}

/// Each token is independently dropped with probability `rate`.
template <typename T>
std::vector<T> delete_tokens(std::span<const T> tokens, double rate, Rng& rng) {
  std::vector<T> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!rng.bernoulli(rate)) out.push_back(t);
  }
  return out;
}

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;
};

/// Replaces each given span with a single mask token. Spans must be sorted,
/// non-overlapping and inside the sequence.
template <typename T>
std::vector<T> infill_spans(std::span<const T> tokens, std::span<const Span> spans, const T& mask) {
  std::vector<T> out;
  std::size_t i = 0;
  for (const auto& s : spans) {
    if (s.start < i || s.start + s.length > tokens.size() || s.length == 0) {
      throw precondition_error("infill_spans: spans must be sorted, non-empty and in range");
    }
    out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i),
               tokens.begin() + static_cast<std::ptrdiff_t>(s.start));
    out.push_back(mask);
    i = s.start + s.length;
  }
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.end());
  return out;
}

/// Samples infill spans: at each uncovered position a span starts with
/// probability rate / span_mean, its length max(1, Poisson(span_mean))
/// truncated at the end of the sequence.
inline std::vector<Span> sample_infill_spans(std::size_t n, double rate, double span_mean, Rng& rng) {
  std::vector<Span> spans;
  const double p_start = std::min(1.0, rate / span_mean);
  std::size_t i = 0;
  while (i < n) {
    if (p_start > 0.0 && rng.bernoulli(p_start)) {
      const auto len = std::min<std::size_t>(std::max<std::uint64_t>(1, rng.poisson(span_mean)), n - i);
      spans.push_back({i, len});
      i += len;
    } else {
      ++i;
    }
  }
  return spans;
}

template <typename T>
std::vector<T> text_infill(std::span<const T> tokens, const T& mask, double rate, double span_mean, Rng& rng) {
  const auto spans = sample_infill_spans(tokens.size(), rate, span_mean, rng);
  return infill_spans<T>(tokens, spans, mask);
}

template <typename T>
std::vector<std::vector<T>> permute_sentences(std::vector<std::vector<T>> sentences, Rng& rng) {
  rng.shuffle(std::span(sentences));
  return sentences;
}

/// Rotation so that index `start` becomes the first token.
template <typename T>
std::vector<T> rotate(std::span<const T> tokens, std::size_t start) {
  std::vector<T> out(tokens.begin(), tokens.end());
  if (!out.empty()) {
    std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(start % out.size()), out.end());
  }
  return out;
}

template <typename T>
std::vector<T> document_rotate(std::span<const T> tokens, Rng& rng) {
  if (tokens.empty()) return {};
  return rotate(tokens, static_cast<std::size_t>(rng.uniform_index(tokens.size())));
}

/// Splits a token sequence into sentences after each token for which
/// `ends_sentence` holds. A trailing fragment forms its own sentence.
template <typename T>
std::vector<std::vector<T>> split_sentences(std::span<const T> tokens, const std::function<bool(const T&)>& ends_sentence) {
  std::vector<std::vector<T>> out;
  std::vector<T> current;
  for (const auto& t : tokens) {
    current.push_back(t);
    if (ends_sentence(t)) out.push_back(std::exchange(current, {}));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

inline bool word_ends_sentence(const std::string& w) {
  return !w.empty() && (w.back() == '.' || w.back() == '!' || w.back() == '?');
}

/// Applies one corruption. Empty input is returned unchanged.
template <typename T>
std::vector<T> apply_noise(std::span<const T> tokens, const NoiseSpec& spec, const T& mask,
                           const std::function<bool(const T&)>& ends_sentence) {
  spec.validate();
  if (tokens.empty()) return {};
  Rng rng(spec.seed);
  switch (spec.kind) {
    case NoiseKind::token_mask: return mask_tokens(tokens, mask, spec.rate, rng);
    case NoiseKind::token_delete: return delete_tokens(tokens, spec.rate, rng);
    case NoiseKind::text_infill: return text_infill(tokens, mask, spec.rate, spec.span_mean, rng);
    case NoiseKind::document_rotate: return document_rotate(tokens, rng);
    case NoiseKind::sentence_permute: {
      auto sentences = permute_sentences(split_sentences(tokens, ends_sentence), rng);
      std::vector<T> out;
      for (auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
      return out;
    }
  }
  return {tokens.begin(), tokens.end()};
}

/// Word-token convenience overload; sentences end at words ending in . ! ?
inline std::vector<std::string> apply_noise(std::span<const std::string> tokens, const NoiseSpec& spec,
                                            const std::string& mask = "<mask>") {
  return apply_noise<std::string>(tokens, spec, mask, word_ends_sentence);
}

}  // namespace geo::seqcore
