#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace ifslab {

#define IFSLAB_EIGEN_TYPEDEFS(Scalar)                                          \
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;        \
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;                     \
  using MatrixRef = Eigen::Ref<const Matrix>;                                  \
  using VectorRef = Eigen::Ref<const Vector>

template <typename Scalar> struct math_types {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
};

// Error taxonomy. The CLI maps these onto its exit codes:
// InputError -> 2, NumericError -> 3, DegenerateError -> 4.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
public:
  DimensionMismatch(const std::string &where, long expected, long got)
      : InputError(where + ": dimension mismatch (expected " +
                   std::to_string(expected) + ", got " + std::to_string(got) +
                   ")") {}
};

class NumericError : public Error {
public:
  using Error::Error;
};

class DegenerateError : public Error {
public:
  using Error::Error;
};

} // namespace ifslab
