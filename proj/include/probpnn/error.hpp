#pragma once

#include <stdexcept>
#include <string>

namespace probpnn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// A numerical invariant was violated (negative variance, NaN gradient, ...).
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Training diverged.
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace probpnn
