#pragma once

#include <stdexcept>
#include <string>

namespace fellap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An element was used with a group context it does not belong to.
class ContextMismatch : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for this kind of group or algebra.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Matrix/element shapes disagree with the algebra or fiber they are used with.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Sections, kernels or witnesses from different bundles were combined.
class BundleMismatch : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain ideal of a partial map.
class DomainViolation : public Error {
 public:
  using Error::Error;
};

/// A linear system that must be consistent for a Fell bundle had no solution.
class InconsistentBundle : public Error {
 public:
  using Error::Error;
};

/// The translate search of the convexifier ran out of candidates.
class SearchExhausted : public Error {
 public:
  using Error::Error;
};

/// Malformed or dangling configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fellap
