#pragma once

#include <stdexcept>
#include <string>

namespace tpqkd {

// Input violates a documented precondition or invariant.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Request is outside the supported problem sizes (e.g. SDP dimension ceiling).
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An estimator's denominator degenerated; no meaningful value exists.
struct EstimatorUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tpqkd
