#pragma once

#include <stdexcept>
#include <string>

namespace sglarma {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs whose shapes do not agree (series length vs design rows, etc.).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A non-finite or otherwise unusable intermediate value.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularHessianError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SimulationDivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateGridError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Requested operation is outside what the routine supports (e.g. n <= p for plain IRLS).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

class FoldSizeError : public Error {
public:
    using Error::Error;
};

/// Caller misuse: invalid option combination, bad argument value.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed experiment configuration; the message names the line and field.
class ConfigError : public UsageError {
public:
    using UsageError::UsageError;
};

}  // namespace sglarma
