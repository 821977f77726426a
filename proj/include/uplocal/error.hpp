#pragma once

#include <stdexcept>
#include <string>

namespace uplocal {

enum class ErrorCode {
  invalid_argument,
  grid_budget,
  unknown_function,
  ft_unavailable,
  not_differentiable,
  zero_norm,
  zero_direction,
  non_integer_direction,
  vanishing_commutator,
  symmetry_violation,
  centering_violated,
  tail_tolerance,
  not_admissible,
  unsupported_dimension,
  io,
};

const char* to_string(ErrorCode code) noexcept;

/// Computation error raised by the library. The code identifies the failed
/// precondition; the message carries the offending values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace uplocal
