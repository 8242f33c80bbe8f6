#pragma once

#include <stdexcept>
#include <string>

namespace staredge {

// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text input (bad token, bad number); message carries the location.
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally invalid file: wrong column count, bad header, bad version.
class FormatError : public Error {
public:
    using Error::Error;
};

// File family we deliberately do not handle (binary PLY, foreign elements).
class UnsupportedFormatError : public FormatError {
public:
    using FormatError::FormatError;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Precondition violation on an in-process call.
class ArgumentError : public Error {
public:
    using Error::Error;
};

class IndexError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// Input geometry too small or too flat for the requested construction.
// Pipeline callers treat this as a tagged non-edge outcome, not a failure.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace staredge
