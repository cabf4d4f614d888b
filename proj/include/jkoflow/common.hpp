#pragma once

#include <stdexcept>
#include <string>

namespace jkoflow {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition or invariant violation on a domain type.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Evaluation outside the tabulated window of a coefficient function.
class RangeError : public Error {
public:
    using Error::Error;
};

inline double square(double x) { return x * x; }

} // namespace jkoflow
