#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bermudan {

enum class ErrorCode {
  invalid_argument = 1,
  not_positive_definite,
  overflow,
  non_finite,
  invariant_violation,
  grid_mismatch,
  depth_exceeded,
  config,
  io,
};

// Every failure raised by the library carries one of the codes above so the
// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when an iterate breaks one of the convergence properties
// (monotone increase, cap by the strike, monotone decrease of the
// descending run). Carries the step and flat node index of the first
// offending node.
class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string invariant, std::size_t step, std::size_t node,
                     double excess, const std::string& what)
      : Error(ErrorCode::invariant_violation, what),
        invariant_(std::move(invariant)),
        step_(step),
        node_(node),
        excess_(excess) {}

  [[nodiscard]] const std::string& invariant() const noexcept { return invariant_; }
  [[nodiscard]] std::size_t step() const noexcept { return step_; }
  [[nodiscard]] std::size_t node() const noexcept { return node_; }
  [[nodiscard]] double excess() const noexcept { return excess_; }

 private:
  std::string invariant_;
  std::size_t step_;
  std::size_t node_;
  double excess_;
};

}  // namespace bermudan
