#pragma once

#include <stdexcept>
#include <string>

namespace rngrate {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input violates a documented precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// The requested computation is outside the supported size regime.
class LimitExceeded : public Error {
public:
    using Error::Error;
};

/// The pair (P, Q) is outside the asymptotic theory, or an operation was
/// requested for the wrong conversion regime.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// A root bracket or threshold could not be established.
class SolverError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rngrate
