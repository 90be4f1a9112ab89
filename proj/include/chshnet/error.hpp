#pragma once

#include <stdexcept>
#include <string>

namespace chshnet {

// Thrown when a computation produces a non-finite value (overflowing
// activations, diverging training, ...). Maps to CLI exit code 1.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on malformed or inconsistent input data (bad CSV rows, missing
// contexts, degenerate statistics). Maps to CLI exit code 1.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace chshnet
