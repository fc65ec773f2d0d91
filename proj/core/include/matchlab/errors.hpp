#pragma once

#include <stdexcept>
#include <string>

namespace matchlab {

// Configuration that cannot be acted on (bad token, missing field, invalid
// combination). The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A spectral truncation cannot represent the requested quantity to the
// required accuracy. Carries the caller's cutoff so the message is actionable.
struct CutoffError : std::runtime_error {
  explicit CutoffError(const std::string& what) : std::runtime_error(what) {}
};

// A grid is too coarse for the certified evaluation that was asked of it.
struct GridError : std::runtime_error {
  explicit GridError(const std::string& what) : std::runtime_error(what) {}
};

// Floating-point hazard that would silently corrupt a result
// (exp underflow, division by a vanishing eigenvalue, negative density
// beyond the truncation noise floor, nonfinite cost entries).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A probabilistic precondition did not hold on this draw. Drivers catch this,
// flag the trial, and keep going; it is not a bug in the inputs.
struct EventViolation : std::runtime_error {
  explicit EventViolation(const std::string& what) : std::runtime_error(what) {}
};

// Too many flagged trials in one experiment group (over 1%). The summary
// would be conditioned on a non-negligible event, so the run refuses to
// report it. The CLI maps this to exit code 3.
struct TrialFailureError : std::runtime_error {
  explicit TrialFailureError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace matchlab
