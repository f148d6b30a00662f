#pragma once

#include <stdexcept>
#include <string>

namespace oslab {

// Error classes map one-to-one onto the tool's exit codes.
enum class ErrorClass : int {
    Config = 1,
    Numeric = 2,
    Io = 3,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const { return cls_; }

  private:
    ErrorClass cls_;
};

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

class NumericError : public Error {
  public:
    explicit NumericError(const std::string& what) : Error(ErrorClass::Numeric, what) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& what) : Error(ErrorClass::Io, what) {}
};

// --- configuration problems ---------------------------------------------

class InvalidConfigError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class InvalidWordError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

// --- numeric / dimensional problems --------------------------------------

class BadDimensionError : public NumericError {
  public:
    using NumericError::NumericError;
};

class DimensionMismatchError : public NumericError {
  public:
    using NumericError::NumericError;
};

class GlancingError : public NumericError {
  public:
    using NumericError::NumericError;
};

class NearGlancingError : public NumericError {
  public:
    using NumericError::NumericError;
};

class NoHitError : public NumericError {
  public:
    using NumericError::NumericError;
};

class NoConvergenceError : public NumericError {
  public:
    using NumericError::NumericError;
};

class ConvergenceFailureError : public NumericError {
  public:
    using NumericError::NumericError;
};

class SingularError : public NumericError {
  public:
    using NumericError::NumericError;
};

class SingularPowerError : public NumericError {
  public:
    using NumericError::NumericError;
};

class SingularResolventError : public NumericError {
  public:
    using NumericError::NumericError;
};

class NotDissipativeError : public NumericError {
  public:
    using NumericError::NumericError;
};

class TailTooLargeError : public NumericError {
  public:
    using NumericError::NumericError;
};

class PoleOnPathError : public NumericError {
  public:
    using NumericError::NumericError;
};

class CFLViolationError : public NumericError {
  public:
    using NumericError::NumericError;
};

class UnstableBlowupError : public NumericError {
  public:
    using NumericError::NumericError;
};

} // namespace oslab
