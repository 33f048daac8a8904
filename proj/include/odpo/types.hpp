#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace odpo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Base of every error raised by the library. The CLI maps these to exit
// codes, so each subclass names the failing precondition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NormViolation : public Error {
 public:
  NormViolation(const std::string& what, double norm)
      : Error(what), norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

class SpanDeficient : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class InvalidScale : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace odpo
