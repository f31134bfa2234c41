// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gmfoo {

/// Base of every error thrown by the library. The C API maps each subclass
/// onto one gmfoo_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or argument validation failure.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Covariance factorization or other floating-point failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed network / data file.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or self-intersecting polygon.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Objective evaluation failure (wraps the underlying cause).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration problem.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmfoo
