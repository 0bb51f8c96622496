#pragma once

#include <stdexcept>
#include <string>

namespace kuramoto {

// Base of every exception thrown by the library. Each subclass corresponds to
// one failure contract, so callers can catch exactly what they can handle.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

class InvalidInitialData : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Envelope or comparison formula evaluated outside its hypotheses.
class NotApplicable : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class PastBlowup : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace kuramoto
