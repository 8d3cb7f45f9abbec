#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace agg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or site lies outside the lattice box.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: densities, configs, files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An aggregation or solve reached the edge of the lattice box.
class BoxTooSmallError : public Error {
 public:
  using Error::Error;
};

class IllegalTopplingError : public Error {
 public:
  using Error::Error;
};

/// Kernel evaluated at its pole.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class WrongDimensionError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residual_history);

  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace agg
