#pragma once

#include <stdexcept>
#include <string>

namespace xmutest {

// Error taxonomy used across the library. The CLI maps these onto its
// exit-code contract.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a statistic (kappa, IOU-F1) has no defined value for the input.
struct UndefinedStatisticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Network-level failure talking to an LLM endpoint after retries.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace xmutest
