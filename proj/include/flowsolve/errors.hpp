#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowsolve {

/// Bad input to an operation (empty schedule, non-positive shift, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not valid for the object's current state (e.g. pop on empty buffer).
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values or a failed residual check.  Carries the time at which
/// the failure was detected when one is known.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what, double t = 0.0)
      : std::runtime_error(what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

/// Duplicated or zero interpolation node.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed grid-field file.  offset() is the byte offset of the problem.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A solver step failed; wraps the underlying message with the step index.
class StepError : public std::runtime_error {
 public:
  StepError(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace flowsolve
