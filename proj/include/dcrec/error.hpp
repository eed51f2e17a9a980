#pragma once

#include <stdexcept>
#include <string>

namespace dcrec {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or argument outside its documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Unreadable/unwritable file or malformed file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, divergence, or a failed numerical routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Mismatched tensor shapes.
class ShapeError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace dcrec
