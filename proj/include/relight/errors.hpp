#pragma once

#include <stdexcept>
#include <string>

namespace relight {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (dimensions, ranges, vocab closure).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file was readable but its contents do not follow the expected layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure: missing input, unwritable output.
class IoError : public Error {
public:
    using Error::Error;
};

/// Light initialization could not select enough seed pixels.
class InitError : public Error {
public:
    using Error::Error;
};

}  // namespace relight
