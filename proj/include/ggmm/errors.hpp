#pragma once

#include <stdexcept>
#include <string>

namespace ggmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot fell below the positive-definiteness threshold.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Every component of some observation underflowed to zero mass.
class DegenerateResponsibility : public Error {
 public:
  using Error::Error;
};

/// A component's total responsibility dropped below the collapse floor.
class ClusterCollapse : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long row) : Error(what), row_(row) {}
  long row() const noexcept { return row_; }

 private:
  long row_;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

}  // namespace ggmm
