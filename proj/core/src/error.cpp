#include "nlsis/error.hpp"

namespace nlsis {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_domain: return "invalid-domain";
    case ErrorCode::kernel_too_narrow: return "kernel-too-narrow";
    case ErrorCode::negative_parameter: return "negative-parameter";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::nonpositive_diffusivity: return "nonpositive-diffusivity";
    case ErrorCode::nonpositive_gamma: return "nonpositive-gamma";
    case ErrorCode::asymmetric_operator: return "asymmetric-operator";
    case ErrorCode::nonpositive_eigenvector: return "nonpositive-eigenvector";
    case ErrorCode::singular_operator: return "singular-A";
    case ErrorCode::invalid_bracket: return "invalid-bracket";
    case ErrorCode::subcritical_regime: return "subcritical-regime";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::assumption_violated: return "assumption-violated";
    case ErrorCode::negative_state: return "negative-state";
    case ErrorCode::step_collapse: return "step-collapse";
    case ErrorCode::mass_drift: return "mass-drift";
    case ErrorCode::division_guard: return "division-guard";
    case ErrorCode::config_invalid: return "config-invalid";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace nlsis
