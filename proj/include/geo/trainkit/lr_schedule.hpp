#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "geo/common/error.hpp"

namespace geo::trainkit {

struct LrScheduleConfig {
  double target_lr = 3e-5;
  std::uint64_t warmup_steps = 250;
  std::uint64_t total_steps = 0;  // required; there is no sensible default
  /// Decoupled weight decay. Carried for exported training configs only.
  double weight_decay = 0.01;

  void validate() const {
    if (!(target_lr > 0)) throw precondition_error("target_lr must be > 0");
    if (weight_decay < 0) throw precondition_error("weight_decay must be >= 0");
    if (warmup_steps == 0 || warmup_steps >= total_steps) {
      throw precondition_error("need 0 < warmup_steps < total_steps (got " + std::to_string(warmup_steps) + ", " +
                               std::to_string(total_steps) + ")");
    }
  }
};

/// Linear warmup to target_lr, then cosine decay to zero at total_steps.
inline double lr_at_step(std::uint64_t step, const LrScheduleConfig& cfg) {
  cfg.validate();
  if (step > cfg.total_steps) {
    throw precondition_error("step " + std::to_string(step) + " beyond total_steps " + std::to_string(cfg.total_steps));
  }
  if (step <= cfg.warmup_steps) {
    return cfg.target_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  }
  const double progress =
      static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.target_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace geo::trainkit
