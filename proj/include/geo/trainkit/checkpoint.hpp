#pragma once

#include <cmath>
#include <span>

#include "geo/common/error.hpp"

namespace geo::trainkit {

struct CheckpointRecord {
  int epoch = 1;
  double validation_loss = 0.0;
};

/// Epoch with the smallest validation loss; ties go to the earliest epoch.
inline int select_best_checkpoint(std::span<const CheckpointRecord> records) {
  if (records.empty()) throw precondition_error("select_best_checkpoint: no records");
  const CheckpointRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.epoch < 1) throw precondition_error("checkpoint epoch must be >= 1");
    if (!std::isfinite(r.validation_loss) || r.validation_loss < 0) {
      throw precondition_error("validation loss must be finite and >= 0");
    }
    if (!best || r.validation_loss < best->validation_loss ||
        (r.validation_loss == best->validation_loss && r.epoch < best->epoch)) {
      best = &r;
    }
  }
  return best->epoch;
}

}  // namespace geo::trainkit
