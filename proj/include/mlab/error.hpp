#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlab {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A potential (or a slice of a path) fails discrete convexity.
class ConvexityError : public Error {
 public:
  ConvexityError(const std::string& what, std::size_t node)
      : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Two objects that must share a grid do not.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// The grid cannot resolve the requested derivatives or slope limits.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// A right-hand side pairs non-trivially with the kernel of an operator.
class CompatibilityError : public Error {
 public:
  CompatibilityError(const std::string& what, double pairing)
      : Error(what + " (pairing " + std::to_string(pairing) + ")"), pairing_(pairing) {}
  double pairing() const noexcept { return pairing_; }

 private:
  double pairing_;
};

/// Quadrature, root finding or descent did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlab
