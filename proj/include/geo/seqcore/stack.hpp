#pragma once

// Post-norm encoder and decoder stacks at random initialisation. No training
// happens here; the stacks exist to check the layer algebra end to end.

#include <cstdint>
#include <vector>

#include "geo/common/rng.hpp"
#include "geo/seqcore/layers.hpp"

namespace geo::seqcore {

template <typename S>
struct EncoderLayer {
  MultiHeadAttention<S> self_attention;
  LayerNorm<S> norm1;
  FeedForward<S> ffn;
  LayerNorm<S> norm2;

  static EncoderLayer init(const ModelDims& dims, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(dims.d_model);
    EncoderLayer l;
    l.self_attention = MultiHeadAttention<S>::init(dims, rng);
    l.norm1 = LayerNorm<S>::identity(d);
    l.ffn = FeedForward<S>::init(dims, rng);
    l.norm2 = LayerNorm<S>::identity(d);
    return l;
  }

  Matrix<S> operator()(const Matrix<S>& x) const {
    Matrix<S> h = residual_layernorm<S>(x, self_attention(x, x, false), norm1);
    return residual_layernorm<S>(h, ffn(h), norm2);
  }
};

template <typename S>
struct DecoderLayer {
  MultiHeadAttention<S> self_attention;
  LayerNorm<S> norm1;
  MultiHeadAttention<S> cross;
  LayerNorm<S> norm2;
  FeedForward<S> ffn;
  LayerNorm<S> norm3;

  static DecoderLayer init(const ModelDims& dims, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(dims.d_model);
    DecoderLayer l;
    l.self_attention = MultiHeadAttention<S>::init(dims, rng);
    l.norm1 = LayerNorm<S>::identity(d);
    l.cross = MultiHeadAttention<S>::init(dims, rng);
    l.norm2 = LayerNorm<S>::identity(d);
    l.ffn = FeedForward<S>::init(dims, rng);
    l.norm3 = LayerNorm<S>::identity(d);
    return l;
  }

  Matrix<S> operator()(const Matrix<S>& y, const Matrix<S>& memory) const {
    Matrix<S> h = residual_layernorm<S>(y, self_attention(y, y, true), norm1);
    h = residual_layernorm<S>(h, cross(h, memory, false), norm2);
    return residual_layernorm<S>(h, ffn(h), norm3);
  }
};

template <typename S>
struct EncoderStack {
  ModelDims dims;
  std::uint64_t seed = 0;
  std::vector<EncoderLayer<S>> layers;

  static EncoderStack init(const ModelDims& dims, std::uint64_t seed) {
    dims.validate();
    EncoderStack s{dims, seed, {}};
    Rng rng(seed);
    for (std::size_t i = 0; i < dims.n_layers; ++i) s.layers.push_back(EncoderLayer<S>::init(dims, rng));
    return s;
  }

  Matrix<S> operator()(const Matrix<S>& x) const {
    if (x.cols() != static_cast<Eigen::Index>(dims.d_model)) throw precondition_error("encoder: width mismatch");
    if (x.rows() > static_cast<Eigen::Index>(dims.max_positions)) {
      throw precondition_error("encoder: input longer than max_positions");
    }
    Matrix<S> h = x;
    for (const auto& layer : layers) h = layer(h);
    return h;
  }
};

template <typename S>
struct DecoderStack {
  ModelDims dims;
  std::uint64_t seed = 0;
  std::vector<DecoderLayer<S>> layers;

  static DecoderStack init(const ModelDims& dims, std::uint64_t seed) {
    dims.validate();
    DecoderStack s{dims, seed, {}};
    Rng rng(seed);
    for (std::size_t i = 0; i < dims.n_layers; ++i) s.layers.push_back(DecoderLayer<S>::init(dims, rng));
    return s;
  }

  /// `target` is the embedded target prefix, `memory` the encoder output.
  Matrix<S> operator()(const Matrix<S>& target, const Matrix<S>& memory) const {
    const auto d = static_cast<Eigen::Index>(dims.d_model);
    if (target.cols() != d || memory.cols() != d) throw precondition_error("decoder: width mismatch");
    if (target.rows() > static_cast<Eigen::Index>(dims.max_positions)) {
      throw precondition_error("decoder: target longer than max_positions");
    }
    Matrix<S> h = target;
    for (const auto& layer : layers) h = layer(h, memory);
    return h;
  }
};

}  // namespace geo::seqcore
