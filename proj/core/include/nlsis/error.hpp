#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlsis {

enum class ErrorCode {
  invalid_domain,
  kernel_too_narrow,
  negative_parameter,
  length_mismatch,
  nonpositive_diffusivity,
  nonpositive_gamma,
  asymmetric_operator,
  nonpositive_eigenvector,
  singular_operator,
  invalid_bracket,
  subcritical_regime,
  no_convergence,
  out_of_range,
  assumption_violated,
  negative_state,
  step_collapse,
  mass_drift,
  division_guard,
  config_invalid,
  invalid_argument,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// All failures raised by the library carry a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace nlsis
