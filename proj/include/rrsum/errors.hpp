#pragma once

#include <stdexcept>
#include <string>

namespace rrsum {

// Error hierarchy maps onto the CLI exit codes:
//   ConfigError -> 1, DataError -> 2, BackendError -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class AuthError : public BackendError {
public:
    using BackendError::BackendError;
};

class RateLimitedError : public BackendError {
public:
    using BackendError::BackendError;
};

class TimeoutError : public BackendError {
public:
    using BackendError::BackendError;
};

class MalformedResponseError : public BackendError {
public:
    using BackendError::BackendError;
};

}  // namespace rrsum
