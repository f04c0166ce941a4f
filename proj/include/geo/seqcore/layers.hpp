#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "geo/common/rng.hpp"
#include "geo/seqcore/attention.hpp"
#include "geo/seqcore/dims.hpp"

namespace geo::seqcore {

inline constexpr double kLayerNormEps = 1e-5;

/// Exact (erf) GeLU.
template <typename S>
S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x / std::numbers::sqrt2_v<S>));
}

/// N(0, std^2) samples via Box-Muller over the portable Rng stream.
template <typename S>
Matrix<S> random_normal(Eigen::Index rows, Eigen::Index cols, double std, Rng& rng) {
  Matrix<S> m(rows, cols);
  S* data = m.data();
  const Eigen::Index n = m.size();
  for (Eigen::Index i = 0; i < n; i += 2) {
    const double u1 = 1.0 - rng.uniform01();  // (0, 1]
    const double u2 = rng.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    data[i] = static_cast<S>(std * r * std::cos(2 * std::numbers::pi * u2));
    if (i + 1 < n) data[i + 1] = static_cast<S>(std * r * std::sin(2 * std::numbers::pi * u2));
  }
  return m;
}

/// Token embedding plus learned positional embedding, row t = E[id_t] + P[t].
template <typename S>
Matrix<S> embed(std::span<const TokenId> ids, const Matrix<S>& token_table, const Matrix<S>& position_table) {
  if (token_table.cols() != position_table.cols()) {
    throw precondition_error("embed: token and position tables differ in width");
  }
  if (static_cast<Eigen::Index>(ids.size()) > position_table.rows()) {
    throw precondition_error("embed: sequence of " + std::to_string(ids.size()) + " tokens exceeds " +
                             std::to_string(position_table.rows()) + " positions");
  }
  Matrix<S> out(static_cast<Eigen::Index>(ids.size()), token_table.cols());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || ids[t] >= token_table.rows()) {
      throw precondition_error("embed: token id " + std::to_string(ids[t]) + " out of range");
    }
    const auto row = static_cast<Eigen::Index>(t);
    out.row(row) = token_table.row(ids[t]) + position_table.row(row);
  }
  return out;
}

template <typename S>
struct LayerNorm {
  RowVector<S> scale;
  RowVector<S> shift;
  S eps = static_cast<S>(kLayerNormEps);

  static LayerNorm identity(Eigen::Index width) {
    return {RowVector<S>::Ones(width), RowVector<S>::Zero(width), static_cast<S>(kLayerNormEps)};
  }

  /// Per-row (x - mean) / sqrt(var + eps), then scale and shift. Population variance.
  Matrix<S> operator()(const Matrix<S>& x) const {
    if (x.cols() != scale.cols()) throw precondition_error("layer_norm: width mismatch");
    Matrix<S> out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const S mean = x.row(i).mean();
      const RowVector<S> centered = x.row(i).array() - mean;
      const S var = centered.squaredNorm() / static_cast<S>(x.cols());
      out.row(i) = (centered / std::sqrt(var + eps)).cwiseProduct(scale) + shift;
    }
    return out;
  }
};

/// LayerNorm(x + sublayer_output).
template <typename S>
Matrix<S> residual_layernorm(const Matrix<S>& x, const Matrix<S>& sublayer_output, const LayerNorm<S>& norm) {
  if (x.rows() != sublayer_output.rows() || x.cols() != sublayer_output.cols()) {
    throw precondition_error("residual_layernorm: shape mismatch");
  }
  return norm(x + sublayer_output);
}

template <typename S>
Matrix<S> residual_layernorm(const Matrix<S>& x, const Matrix<S>& sublayer_output) {
  return residual_layernorm(x, sublayer_output, LayerNorm<S>::identity(x.cols()));
}

/// Position-wise W2(GeLU(W1 x + b1)) + b2, written for row vectors.
template <typename S>
struct FeedForward {
  Matrix<S> w1;  // d_model x d_ffn
  RowVector<S> b1;
  Matrix<S> w2;  // d_ffn x d_model
  RowVector<S> b2;

  static FeedForward init(const ModelDims& dims, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(dims.d_model), f = static_cast<Eigen::Index>(dims.d_ffn);
    return {random_normal<S>(d, f, dims.init_std, rng), RowVector<S>::Zero(f),
            random_normal<S>(f, d, dims.init_std, rng), RowVector<S>::Zero(d)};
  }

  Matrix<S> operator()(const Matrix<S>& x) const {
    if (x.cols() != w1.rows() || w1.cols() != w2.rows() || b1.cols() != w1.cols() || b2.cols() != w2.cols()) {
      throw precondition_error("ffn: shape mismatch");
    }
    Matrix<S> hidden = (x * w1).rowwise() + b1;
    hidden = hidden.unaryExpr([](S v) { return gelu(v); });
    return (hidden * w2).rowwise() + b2;
  }
};

/// Multi-head attention with input and output projections.
template <typename S>
struct MultiHeadAttention {
  std::size_t n_heads = 1;
  Matrix<S> wq, wk, wv, wo;  // d_model x d_model
  RowVector<S> bq, bk, bv, bo;

  static MultiHeadAttention init(const ModelDims& dims, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(dims.d_model);
    MultiHeadAttention m;
    m.n_heads = dims.n_heads;
    m.wq = random_normal<S>(d, d, dims.init_std, rng);
    m.wk = random_normal<S>(d, d, dims.init_std, rng);
    m.wv = random_normal<S>(d, d, dims.init_std, rng);
    m.wo = random_normal<S>(d, d, dims.init_std, rng);
    m.bq = m.bk = m.bv = m.bo = RowVector<S>::Zero(d);
    return m;
  }

  /// Queries from `x_query`, keys and values from `x_kv`.
  Matrix<S> operator()(const Matrix<S>& x_query, const Matrix<S>& x_kv, bool causal) const {
    const Eigen::Index d = wq.rows();
    if (x_query.cols() != d || x_kv.cols() != d) throw precondition_error("multi-head attention: width mismatch");
    const Eigen::Index dk = d / static_cast<Eigen::Index>(n_heads);
    const Matrix<S> q = (x_query * wq).rowwise() + bq;
    const Matrix<S> k = (x_kv * wk).rowwise() + bk;
    const Matrix<S> v = (x_kv * wv).rowwise() + bv;
    Matrix<S> heads(x_query.rows(), d);
    for (Eigen::Index h = 0; h < static_cast<Eigen::Index>(n_heads); ++h) {
      const Matrix<S> qh = q.middleCols(h * dk, dk);
      const Matrix<S> kh = k.middleCols(h * dk, dk);
      const Matrix<S> vh = v.middleCols(h * dk, dk);
      heads.middleCols(h * dk, dk) = causal ? masked_attention<S>(qh, kh, vh) : attention<S>(qh, kh, vh);
    }
    return (heads * wo).rowwise() + bo;
  }
};

}  // namespace geo::seqcore
