#pragma once

#include "ifslab/operators.hpp"

#include <random>

namespace ifslab {

/// Deterministic random matrix generators for randomized suites.
template <typename Scalar = double> class RandomMatrices {
public:
  IFSLAB_EIGEN_TYPEDEFS(Scalar);

  explicit RandomMatrices(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64 &engine() { return rng_; }

  Scalar uniform(Scalar lo, Scalar hi) {
    return std::uniform_real_distribution<double>(double(lo), double(hi))(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Matrix gaussian(Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i)
        m(i, j) = Scalar(n(rng_));
    return m;
  }

  Vector gaussian_vector(Eigen::Index d) { return gaussian(d, 1); }

  Matrix orthogonal(Eigen::Index d) {
    const Eigen::HouseholderQR<Matrix> qr(gaussian(d, d));
    return qr.householderQ() * Matrix::Identity(d, d);
  }

  /// Q1 diag(sigma) Q2^T with singular values drawn from [lo, hi].
  Matrix with_singular_values(Eigen::Index d, Scalar lo, Scalar hi) {
    Vector sigma(d);
    for (Eigen::Index i = 0; i < d; ++i)
      sigma(i) = uniform(lo, hi);
    return orthogonal(d) * sigma.asDiagonal() * orthogonal(d).transpose();
  }

  /// Dense matrix rescaled so its operator norm is uniform in (0, max_norm].
  Matrix contraction(Eigen::Index d, Scalar max_norm) {
    Matrix m = gaussian(d, d);
    const Scalar norm = operator_norm(m);
    if (norm == Scalar(0))
      return m;
    return m * (max_norm * uniform(Scalar(0.05), Scalar(1)) / norm);
  }

  Matrix symmetric(Eigen::Index d) {
    const Matrix m = gaussian(d, d);
    return (m + m.transpose()) / Scalar(2);
  }

private:
  std::mt19937_64 rng_;
};

} // namespace ifslab
