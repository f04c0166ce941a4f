#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace geo {

/// Caller violated an operation's precondition.
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed persisted data. Carries the 1-based record index when known.
class format_error : public std::runtime_error {
 public:
  format_error(std::size_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
  explicit format_error(const std::string& what) : std::runtime_error(what), row_(0) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// The generative engine failed after exhausting its retry budget.
class engine_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration (harness exit code 1).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pipeline stage failed (harness exit code 2).
class stage_error : public std::runtime_error {
 public:
  stage_error(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace geo
