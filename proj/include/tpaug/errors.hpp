#pragma once

#include <stdexcept>
#include <string>

namespace tpaug {

/// Caller passed arguments that violate a precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector or matrix sizes do not agree.
class DimensionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// A factorization failed (non positive-definite covariance, singular
/// precision sum, non-finite values).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base class for problems with persisted content.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content. `field()` names the offending JSON path.
class ParseError : public DataError {
 public:
  ParseError(std::string field, const std::string& what)
      : DataError("parse error at '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Unknown or unsupported format version / artifact kind.
class VersionError : public DataError {
 public:
  using DataError::DataError;
};

/// A rotation failed the orthonormality or determinant check.
class FrameValidityError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace tpaug
