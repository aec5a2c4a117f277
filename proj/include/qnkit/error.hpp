#pragma once

#include <stdexcept>
#include <string>

namespace qnkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structurally invalid input: bad model, bad routing, unsupported station mix.
class ModelError : public Error {
public:
    using Error::Error;
};

/// A numeric method could not produce a result (divergent series, singular
/// system, unstable station, guard exceeded).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed model or configuration file.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace qnkit
