#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>

#include "geo/common/error.hpp"

namespace geo::seqcore {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

using TokenId = std::int32_t;

/// Encoder/decoder shape. Defaults are the BART-base configuration.
struct ModelDims {
  std::size_t d_model = 768;
  std::size_t n_heads = 12;
  std::size_t d_ffn = 3072;
  std::size_t n_layers = 6;
  std::size_t max_positions = 1024;
  double dropout = 0.1;  // recorded only; inference never applies dropout
  double init_std = 0.02;

  std::size_t d_k() const { return d_model / n_heads; }

  void validate() const {
    if (d_model == 0 || n_heads == 0 || d_ffn == 0 || max_positions == 0) {
      throw precondition_error("model dimensions must be positive");
    }
    if (d_model % n_heads != 0) {
      throw precondition_error("d_model (" + std::to_string(d_model) + ") not divisible by n_heads (" +
                               std::to_string(n_heads) + ")");
    }
    if (init_std <= 0) throw precondition_error("init_std must be > 0");
    if (dropout < 0 || dropout >= 1) throw precondition_error("dropout must be in [0,1)");
  }
};

}  // namespace geo::seqcore
