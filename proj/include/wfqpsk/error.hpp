#pragma once

#include <stdexcept>
#include <string>

namespace wfqpsk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad order, transmissivity, gain...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A probability table lost more mass to truncation than allowed.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// A numerical routine produced a result outside its accuracy contract.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Closed-loop simulation blew up.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Configuration file or flag problems; the message carries the key path.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wfqpsk
