#pragma once

#include <stdexcept>
#include <string>

namespace semret {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, truncated or version-mismatched input files.
class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace semret
