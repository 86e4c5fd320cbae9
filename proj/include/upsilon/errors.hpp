#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace upsilon {

enum class ErrorKind {
  Parse,
  Validation,
  DimensionMismatch,
  InvalidArgument,
  Numerical,
  NoStableConfiguration,
  TheoremViolation,
};

/// Base of every error thrown by the library. `location` is either empty or a
/// "source: /json/pointer" string produced by the document readers.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string location = {})
      : std::runtime_error(compose(message, location)),
        kind_(kind),
        message_(std::move(message)),
        location_(std::move(location)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& location() const noexcept { return location_; }

  /// Process exit status documented for the CLI.
  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::Parse: return 2;
      case ErrorKind::Validation:
      case ErrorKind::DimensionMismatch: return 3;
      case ErrorKind::NoStableConfiguration: return 4;
      case ErrorKind::TheoremViolation: return 5;
      default: return 1;
    }
  }

 private:
  static std::string compose(const std::string& message, const std::string& location) {
    return location.empty() ? message : location + ": " + message;
  }

  ErrorKind kind_;
  std::string message_;
  std::string location_;
};

class ParseError : public Error {
 public:
  explicit ParseError(std::string message, std::string location = {})
      : Error(ErrorKind::Parse, std::move(message), std::move(location)) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::string message, std::string location = {})
      : Error(ErrorKind::Validation, std::move(message), std::move(location)) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(std::string message, std::string location = {})
      : Error(ErrorKind::DimensionMismatch, std::move(message), std::move(location)) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(std::string message)
      : Error(ErrorKind::InvalidArgument, std::move(message)) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(std::string message)
      : Error(ErrorKind::Numerical, std::move(message)) {}
};

/// Two adjacent weights of one filtration became equal after rounding.
class OrderingCollapse : public NumericalError {
 public:
  OrderingCollapse(std::size_t component, std::size_t step)
      : NumericalError("weights of component " + std::to_string(component) + " collapse at step " +
                       std::to_string(step)),
        component_(component),
        step_(step) {}

  std::size_t component() const noexcept { return component_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t component_;
  std::size_t step_;
};

class NoStableConfiguration : public Error {
 public:
  explicit NoStableConfiguration(std::string message)
      : Error(ErrorKind::NoStableConfiguration, std::move(message)) {}
};

class TheoremViolation : public Error {
 public:
  explicit TheoremViolation(std::string message)
      : Error(ErrorKind::TheoremViolation, std::move(message)) {}
};

}  // namespace upsilon
