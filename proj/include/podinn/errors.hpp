#pragma once

#include <stdexcept>
#include <string>

namespace podinn {

/// Bad command-line usage or inconsistent configuration. Exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or mismatched data files / checkpoints. Exit code 3.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure (non-finite values, integrator breakdown). Exit code 4.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace podinn
