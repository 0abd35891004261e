#pragma once

#include <stdexcept>
#include <string>

namespace qbp {

/// Base class for every error raised by the library.
class QbpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown site id, mismatched local dimension, or operators on incompatible layouts.
class LayoutError : public QbpError {
 public:
  using QbpError::QbpError;
};

/// Total Hilbert-space dimension exceeds the configured cap.
class DimensionCapError : public QbpError {
 public:
  DimensionCapError(long dim, long cap)
      : QbpError("total dimension " + std::to_string(dim) + " exceeds cap " +
                 std::to_string(cap)),
        dim_(dim),
        cap_(cap) {}
  long dim() const { return dim_; }
  long cap() const { return cap_; }

 private:
  long dim_;
  long cap_;
};

class NotHermitianError : public QbpError {
 public:
  using QbpError::QbpError;
};

/// Raised by the matrix logarithm when an eigenvalue falls below the floor.
class SingularOperatorError : public QbpError {
 public:
  explicit SingularOperatorError(double eigenvalue)
      : QbpError("operator is not positive definite: eigenvalue " +
                 std::to_string(eigenvalue) + " below floor"),
        eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Structural problem with a graph (cycle, disconnected, dangling vertex, non-leaf...).
class GraphError : public QbpError {
 public:
  using QbpError::QbpError;
};

/// Input violates an operation's precondition (non-density state, bad parameter...).
class DomainError : public QbpError {
 public:
  using QbpError::QbpError;
};

}  // namespace qbp
