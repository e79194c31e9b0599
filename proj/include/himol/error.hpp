#pragma once
#include <stdexcept>
#include <string>

namespace himol {

// Root of every library exception. The CLI maps these to exit code 1
// (user-facing) and anything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during optimization.
class DivergedLoss : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace himol
