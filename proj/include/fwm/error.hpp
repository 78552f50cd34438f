#pragma once

#include <stdexcept>
#include <string>

namespace fwm {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes: ConfigError -> 2, everything else -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical or tabulated domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Requested computation has no solution (e.g. deconvolving below resolution).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Conditioning on an event of zero probability.
class ConditionError : public Error {
 public:
  using Error::Error;
};

// Photon-number truncation lost more mass than allowed.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class InvalidProfileError : public Error {
 public:
  using Error::Error;
};

// Bad configuration, usage, or unreadable input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fwm

namespace fwm {

// Peak or half-maximum crossing at the edge of a sampled axis.
class EdgeError : public Error {
 public:
  using Error::Error;
};

}  // namespace fwm
