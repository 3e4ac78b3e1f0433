#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pomo {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller passed an out-of-range / malformed argument.
struct ArgumentError : Error {
    using Error::Error;
};

// A precondition on an action sequence or state transition was violated
// (illegal step, non-permutation tour, overweight selection, ...).
struct ContractViolation : Error {
    using Error::Error;
};

// A problem instance or operation exceeds a hard size limit.
struct SizeError : Error {
    using Error::Error;
};

// Corrupt or truncated file. Carries the byte offset where parsing failed.
struct FormatError : Error {
    FormatError(const std::string& msg, std::size_t at)
        : Error(msg + " (at byte offset " + std::to_string(at) + ")"), offset(at) {}
    std::size_t offset;
};

// Structurally valid file or object with the wrong content kind.
struct SchemaError : Error {
    using Error::Error;
};

// Invalid configuration (unknown keys, incompatible model variants, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Non-finite value where a finite one is required.
struct NumericError : Error {
    using Error::Error;
};

// Operation is not defined for the given problem class.
struct UnsupportedProblem : Error {
    using Error::Error;
};

// A compute budget (branch-and-bound node limit, ...) was exhausted.
struct ResourceError : Error {
    using Error::Error;
};

}  // namespace pomo
