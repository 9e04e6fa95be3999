#pragma once

#include <stdexcept>
#include <string>

namespace kppfrag {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A grid, field or parameter violates its construction invariants.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// periodise() was asked for a level the grid cannot represent on its nodes.
class DivisibilityError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonPositiveMeanResource : public Error {
 public:
  using Error::Error;
};

/// Newton and the pseudo-time fallback both failed.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class SingularAdjoint : public Error {
 public:
  using Error::Error;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kppfrag
