#pragma once

#include <stdexcept>
#include <string>

namespace cnmt {

/// Root of every error raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

class PreconditionError : public Error {
  public:
    using Error::Error;
};

class IndexError : public Error {
  public:
    using Error::Error;
};

/// API misuse: backward twice, non-scalar loss, missing attention record.
class ContractError : public Error {
  public:
    using Error::Error;
};

/// Bad configuration or usage (CLI exit code 1).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed or misaligned input data (CLI exit code 2).
class InputError : public Error {
  public:
    using Error::Error;
};

/// NaN/Inf in loss or gradients (CLI exit code 3).
class NumericalError : public Error {
  public:
    using Error::Error;
};

} // namespace cnmt
