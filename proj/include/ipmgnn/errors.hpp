#pragma once

#include <stdexcept>
#include <string>

namespace ipmgnn {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidInstance : public Error {
 public:
  using Error::Error;
};

// Solver-side failures.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InitNotFound : public Error {
 public:
  using Error::Error;
};

class BreakdownError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class NeighborhoodViolation : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DivisionByZero : public DomainError {
 public:
  using DomainError::DomainError;
};

// Message-passing interpreter.
class LocalityViolation : public Error {
 public:
  using Error::Error;
};

class UndeclaredChannel : public Error {
 public:
  using Error::Error;
};

// File formats.
class FormatError : public Error {
 public:
  using Error::Error;
};

class MissingTensor : public FormatError {
 public:
  explicit MissingTensor(const std::string& name)
      : FormatError("weight file is missing tensor '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ipmgnn
