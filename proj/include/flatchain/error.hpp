#pragma once

#include <stdexcept>
#include <string>

namespace flatchain {

/// Base for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad files, mismatched groups or complexes, unsupported
/// dimensions.
class InputError : public Error {
public:
    using Error::Error;
};

/// A generic-position assumption failed and resampling did not recover.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// An exact solver or enumerator would exceed its configured size cap.
class CapExceededError : public Error {
public:
    using Error::Error;
};

}  // namespace flatchain
