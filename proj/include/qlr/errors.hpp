#pragma once

#include <stdexcept>
#include <string>

namespace qlr {

// malformed input files, bad headers, unparseable lines
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// indices outside the declared ranges
struct BoundsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// two inequivalent values supplied for the same canonical entry
struct ConflictError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// mathematically invalid request (empty coefficient vector, pole hit, ...)
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// iterative solver failed to reach the requested residual
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad gate/circuit wiring (overlapping targets and controls, ...)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// explicit matrix would exceed the configured memory budget
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// the pipeline requires a nondegenerate ground state
struct DegenerateGroundState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qlr
