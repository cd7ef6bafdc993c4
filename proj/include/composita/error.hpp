#pragma once

#include <stdexcept>
#include <string>

namespace composita {

// Base of every exception thrown by the library. Messages are prefixed with
// the module and operation that raised them.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or non-finite arguments.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Index or argument outside the supported range (degree, |t| > 1, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Function outside an operator's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A numerical contract could not be met (uniformity check, rank deficiency).
class ConstraintFailure : public Error {
 public:
  using Error::Error;
};

// Node count, probe count or similar exceeded a configured limit.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

// A constituent function produced a non-finite value during evaluation.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Configuration or structural validation failure.
class ValidationError : public Error {
 public:
  using Error::Error;
};

namespace detail {

[[noreturn]] inline void fail_invalid(const std::string& where, const std::string& what) {
  throw InvalidInput(where + ": " + what);
}

[[noreturn]] inline void fail_range(const std::string& where, const std::string& what) {
  throw RangeError(where + ": " + what);
}

}  // namespace detail

}  // namespace composita
