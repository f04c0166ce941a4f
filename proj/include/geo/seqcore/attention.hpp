#pragma once

// Scaled dot-product attention in its three forms. Rows are positions.

#include <cmath>
#include <limits>
#include <string>

#include "geo/seqcore/dims.hpp"

namespace geo::seqcore {

/// Added to scores above the diagonal in causal attention. Large enough that
/// exp() of a masked score underflows to exactly 0, finite so that a fully
/// masked row cannot produce NaN.
template <typename S>
constexpr S kMaskValue = -std::numeric_limits<S>::max() / S(4);

/// Row-wise numerically stable softmax.
template <typename S>
Matrix<S> softmax_rows(const Matrix<S>& scores) {
  Matrix<S> out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const S max = scores.row(i).maxCoeff();
    S sum = 0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const S e = std::exp(scores(i, j) - max);
      out(i, j) = e;
      sum += e;
    }
    out.row(i) /= sum;
  }
  return out;
}

template <typename S>
void check_attention_shapes(const Matrix<S>& q, const Matrix<S>& k, const Matrix<S>& v) {
  if (q.cols() != k.cols()) {
    throw precondition_error("attention: query width " + std::to_string(q.cols()) + " != key width " +
                             std::to_string(k.cols()));
  }
  if (k.rows() != v.rows()) {
    throw precondition_error("attention: " + std::to_string(k.rows()) + " keys but " + std::to_string(v.rows()) +
                             " values");
  }
  if (q.cols() == 0 || k.rows() == 0) throw precondition_error("attention: empty operand");
}

/// softmax(Q K^T / sqrt(d_k) [+ causal mask]) as a T_q x T_k weight matrix.
template <typename S>
Matrix<S> attention_weights(const Matrix<S>& q, const Matrix<S>& k, bool causal = false) {
  Matrix<S> scores = (q * k.transpose()) / std::sqrt(static_cast<S>(q.cols()));
  if (causal) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < scores.cols(); ++j) scores(i, j) += kMaskValue<S>;
    }
  }
  return softmax_rows<S>(scores);
}

template <typename S>
Matrix<S> attention(const Matrix<S>& q, const Matrix<S>& k, const Matrix<S>& v) {
  check_attention_shapes(q, k, v);
  return attention_weights(q, k) * v;
}

/// Decoder self-attention: position i sees positions <= i only.
template <typename S>
Matrix<S> masked_attention(const Matrix<S>& q, const Matrix<S>& k, const Matrix<S>& v) {
  check_attention_shapes(q, k, v);
  if (q.rows() != k.rows()) {
    throw precondition_error("masked_attention: needs as many queries as keys");
  }
  return attention_weights(q, k, true) * v;
}

/// Decoder states attend over every encoder position.
template <typename S>
Matrix<S> cross_attention(const Matrix<S>& decoder_states, const Matrix<S>& encoder_states) {
  return attention<S>(decoder_states, encoder_states, encoder_states);
}

}  // namespace geo::seqcore
