#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace consensus_lab {

/// A precondition on a numeric or structural argument was violated.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed edge-list input. `line()` is 1-based; 0 means "whole input".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The exact chain would exceed the configured state-space guard.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A replication hit its step cap before reaching consensus.
class TimeoutError : public std::runtime_error {
 public:
  TimeoutError(std::uint64_t steps, std::vector<std::uint32_t> partial_state)
      : std::runtime_error("no consensus after " + std::to_string(steps) + " steps"),
        steps_(steps),
        partial_state_(std::move(partial_state)) {}

  std::uint64_t steps() const noexcept { return steps_; }
  const std::vector<std::uint32_t>& partial_state() const noexcept { return partial_state_; }

 private:
  std::uint64_t steps_;
  std::vector<std::uint32_t> partial_state_;
};

/// One or more replications of a Monte Carlo batch timed out.
class EstimateError : public std::runtime_error {
 public:
  explicit EstimateError(std::vector<std::size_t> replications)
      : std::runtime_error(describe(replications)), replications_(std::move(replications)) {}

  const std::vector<std::size_t>& replications() const noexcept { return replications_; }

 private:
  static std::string describe(const std::vector<std::size_t>& reps) {
    std::string s = std::to_string(reps.size()) + " replication(s) timed out:";
    for (std::size_t i = 0; i < reps.size() && i < 32; ++i) s += " " + std::to_string(reps[i]);
    if (reps.size() > 32) s += " ...";
    return s;
  }

  std::vector<std::size_t> replications_;
};

/// Should be unreachable for valid inputs (e.g. a singular absorbing-chain solve).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace consensus_lab
