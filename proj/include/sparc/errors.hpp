#pragma once

#include <stdexcept>
#include <string>

namespace sparc {

/// Bad input data: unreadable files, malformed records, mismatched artifacts.
/// Maps to CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller misuse: bad arguments or configuration. Maps to CLI exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A broken internal invariant (e.g. non-finite loss). Maps to CLI exit code 3.
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sparc
