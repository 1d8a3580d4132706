#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geocurve {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Mismatched ambient dimensions, curve lengths, weight counts, and the like.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Curves that should live on a shared time grid but do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

// Log map requested at (or numerically indistinguishable from) the antipode,
// where it is undefined. Carries the curve node index when raised from a
// discretized-curve operation.
class AntipodalPoint : public Error {
 public:
  explicit AntipodalPoint(const std::string& what) : Error(what) {}
  AntipodalPoint(const std::string& what, std::size_t node)
      : Error(what), node_(node), has_node_(true) {}

  bool has_node() const { return has_node_; }
  std::size_t node() const { return node_; }

 private:
  std::size_t node_ = 0;
  bool has_node_ = false;
};

// Empirical covariance with no usable spectrum (e.g. identical regressors).
class DegenerateCovariance : public Error {
 public:
  using Error::Error;
};

// Bad arguments, bad configuration files, malformed inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Filesystem-level read/write failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace geocurve
