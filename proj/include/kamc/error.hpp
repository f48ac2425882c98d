#pragma once

#include <stdexcept>
#include <string>

namespace kamc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or indices that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Minor enumeration larger than the supported table size.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Every minor (or every probe point) vanished, so L2/L1 is undefined.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Point lies on a piece boundary of a piecewise-linear map.
class BoundaryPointError : public Error {
 public:
  using Error::Error;
};

/// Two plateau values of the embedding coincide within tolerance.
class CollisionError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or configuration. `field()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace kamc
