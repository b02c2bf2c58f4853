#pragma once

#include <stdexcept>
#include <string>

namespace pfio {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// bad grid sizes, empty shapes, negative counts
class SizingError : public Error {
 public:
  using Error::Error;
};

// argument outside the domain of a function (p < 1, rho outside [0,1), ...)
class DomainError : public Error {
 public:
  using Error::Error;
};

// phase evaluated where some block of xi vanishes
class SingularArgument : public Error {
 public:
  using Error::Error;
};

// an experiment was asked to run outside its stated hypotheses
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfio
