#pragma once

#include "ifslab/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace ifslab {

/// Eigen-decomposition of a symmetric matrix: eigenvalues ascending, unit
/// eigenvectors as columns, each with its first significant entry positive.
template <typename Scalar = double> struct SymmetricSpectrum {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// Open real interval (lo, hi); either end may be infinite.
template <typename Scalar = double> struct Interval {
  Scalar lo = -std::numeric_limits<Scalar>::infinity();
  Scalar hi = std::numeric_limits<Scalar>::infinity();

  static Interval below(Scalar x) { return {-std::numeric_limits<Scalar>::infinity(), x}; }
  static Interval above(Scalar x) { return {x, std::numeric_limits<Scalar>::infinity()}; }
  static Interval everything() { return {}; }
  bool contains(Scalar x) const { return lo < x && x < hi; }
};

template <typename Scalar = double> struct SpectralProjection {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  Matrix projection;
  int rank = 0;
  Interval<Scalar> interval;
};

template <typename Scalar = double> struct PolarFactors {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  Matrix unitary;
  Matrix positive;
};

/// A contraction built from a spectral selection of the defect operator,
/// together with its measured norm and the a-priori bound it must respect.
template <typename Scalar = double> struct CertifiedContraction {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  Matrix contraction;
  Scalar norm = 0;
  Scalar bound = 0;
  int rank = 0;
  Matrix projection;       // spectral projection of the defect operator
  Matrix range_projection; // high-defect only: projection onto (I-U)P(R^d)
};

class BoundaryEigenvalue : public NumericError {
public:
  using NumericError::NumericError;
};

inline constexpr double kJacobiTolerance = 1e-14;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kBoundaryGap = 1e-9;
inline constexpr double kCertificateSlack = 1e-9;
inline constexpr double kSingularThreshold = 1e-9;
inline constexpr double kPsdClamp = 1e-12;

namespace detail {

template <typename Derived>
void require_square(const char *where, const Eigen::MatrixBase<Derived> &a) {
  if (a.rows() != a.cols())
    throw InputError(std::string(where) + ": matrix must be square (got " +
                     std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + ")");
  if (!a.allFinite())
    throw InputError(std::string(where) + ": non-finite entry");
}

} // namespace detail

template <typename Derived>
typename Derived::PlainObject adjoint(const Eigen::MatrixBase<Derived> &a) {
  return a.transpose();
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
template <typename Derived>
SymmetricSpectrum<typename Derived::Scalar>
symmetric_eigen(const Eigen::MatrixBase<Derived> &n) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  using Vector = typename math_types<Scalar>::Vector;
  using Index = Eigen::Index;
  using std::abs;
  using std::sqrt;

  detail::require_square("symmetric_eigen", n);
  const Index d = n.rows();
  const Scalar scale = std::max<Scalar>(Scalar(1), n.cwiseAbs().maxCoeff());
  if ((n - n.transpose()).cwiseAbs().maxCoeff() > Scalar(kSymmetryTolerance) * scale)
    throw InputError("symmetric_eigen: input is not symmetric");

  Matrix a = (n + n.transpose()) / Scalar(2);
  Matrix v = Matrix::Identity(d, d);
  const Scalar frob = a.norm();

  auto off_diagonal = [&] {
    Scalar s = 0;
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < d; ++i)
        if (i != j)
          s += a(i, j) * a(i, j);
    return sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal() <= Scalar(kJacobiTolerance) * frob)
      break;
    for (Index p = 0; p < d; ++p)
      for (Index q = p + 1; q < d; ++q) {
        if (a(p, q) == Scalar(0))
          continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        v.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
      }
  }

  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return a(x, x) < a(y, y); });

  SymmetricSpectrum<Scalar> out;
  out.eigenvalues = Vector(d);
  out.eigenvectors = Matrix(d, d);
  for (Index k = 0; k < d; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    Vector col = v.col(src);
    col.normalize();
    for (Index i = 0; i < d; ++i)
      if (abs(col(i)) > Scalar(1e-12)) {
        if (col(i) < 0)
          col = -col;
        break;
      }
    out.eigenvectors.col(k) = col;
  }
  return out;
}

/// Largest singular value, via the top eigenvalue of A^T A.
template <typename Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived> &a) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  if (a.size() == 0)
    return Scalar(0);
  if (!a.allFinite())
    throw InputError("operator_norm: non-finite entry");
  Matrix gram = a.transpose() * a;
  gram = (gram + gram.transpose()).eval() / Scalar(2);
  const auto spec = symmetric_eigen(gram);
  using std::sqrt;
  return sqrt(std::max(Scalar(0), spec.eigenvalues(spec.eigenvalues.size() - 1)));
}

/// Orthogonal projection onto the eigenvectors whose eigenvalues lie in the
/// open interval. Endpoints closer than 1e-9 to an eigenvalue are rejected.
template <typename Scalar>
SpectralProjection<Scalar>
spectral_projection(const SymmetricSpectrum<Scalar> &spec,
                    const Interval<Scalar> &interval) {
  using Matrix = typename math_types<Scalar>::Matrix;
  using std::abs;
  const Eigen::Index d = spec.eigenvalues.size();
  SpectralProjection<Scalar> out;
  out.interval = interval;
  out.projection = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Scalar lambda = spec.eigenvalues(k);
    for (Scalar end : {interval.lo, interval.hi})
      if (std::isfinite(static_cast<double>(end)) &&
          abs(lambda - end) <= Scalar(kBoundaryGap))
        throw BoundaryEigenvalue(
            "spectral_projection: eigenvalue within 1e-9 of interval endpoint");
    if (interval.contains(lambda)) {
      out.projection.noalias() +=
          spec.eigenvectors.col(k) * spec.eigenvectors.col(k).transpose();
      ++out.rank;
    }
  }
  return out;
}

/// A = U P with U orthogonal and P = sqrt(A^T A).
template <typename Derived>
PolarFactors<typename Derived::Scalar>
polar_decompose(const Eigen::MatrixBase<Derived> &a) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  using Vector = typename math_types<Scalar>::Vector;
  detail::require_square("polar_decompose", a);
  const Eigen::Index d = a.rows();

  Matrix gram = a.transpose() * a;
  gram = (gram + gram.transpose()).eval() / Scalar(2);
  const auto spec = symmetric_eigen(gram);
  const Scalar top = std::max(Scalar(1), spec.eigenvalues.cwiseAbs().maxCoeff());

  Vector sigma(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Scalar lambda = spec.eigenvalues(k);
    if (lambda < -Scalar(kPsdClamp) * top)
      throw NumericError("polar_decompose: A^T A has a negative eigenvalue");
    using std::sqrt;
    sigma(k) = sqrt(std::max(Scalar(0), lambda));
  }
  if (d > 0 && sigma.minCoeff() <= Scalar(kSingularThreshold))
    throw NumericError("polar_decompose: matrix is singular");

  const Matrix &v = spec.eigenvectors;
  PolarFactors<Scalar> out;
  out.positive = v * sigma.asDiagonal() * v.transpose();
  out.unitary = a * (v * sigma.cwiseInverse().asDiagonal() * v.transpose());
  return out;
}

/// Residual of I - A A^T = U (I - A^T A) U^T for the polar unitary U of A.
template <typename Derived>
typename Derived::Scalar
flip_identity_residual(const Eigen::MatrixBase<Derived> &a) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  const auto polar = polar_decompose(a);
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix &u = polar.unitary;
  const Matrix lhs = id - a * a.transpose();
  const Matrix rhs = u * (id - a.transpose() * a) * u.transpose();
  return operator_norm(lhs - rhs);
}

/// Same identity written in terms of S with A = I - S.
template <typename Derived>
typename Derived::Scalar
corollary_217_residual(const Eigen::MatrixBase<Derived> &s) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  detail::require_square("corollary_217_residual", s);
  if (operator_norm(s) >= Scalar(1))
    throw NumericError("corollary_217_residual: requires ||S|| < 1");
  const Matrix id = Matrix::Identity(s.rows(), s.cols());
  const Matrix u = polar_decompose(Matrix(id - s)).unitary;
  const Matrix lhs = s + s.transpose() - s * s.transpose();
  const Matrix rhs = u * (s + s.transpose() - s.transpose() * s) * u.transpose();
  return operator_norm(lhs - rhs);
}

/// N = (I - U)^T (I - U).
template <typename Derived>
typename math_types<typename Derived::Scalar>::Matrix
defect_operator(const Eigen::MatrixBase<Derived> &u) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  detail::require_square("defect_operator", u);
  const Matrix m = Matrix::Identity(u.rows(), u.cols()) - u;
  Matrix n = m.transpose() * m;
  return (n + n.transpose()) / Scalar(2);
}

namespace detail {

template <typename Derived>
void require_strict_contraction(const char *where,
                                const Eigen::MatrixBase<Derived> &u) {
  require_square(where, u);
  if (operator_norm(u) >= typename Derived::Scalar(1))
    throw NumericError(std::string(where) + ": requires ||U|| < 1");
}

} // namespace detail

/// T = (I - U) P where P selects the defect spectrum below 1 - eps.
/// Guarantees ||T|| <= sqrt(1 - eps).
template <typename Derived>
CertifiedContraction<typename Derived::Scalar>
low_defect_contraction(const Eigen::MatrixBase<Derived> &u,
                       typename Derived::Scalar eps) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  if (!(eps > Scalar(0) && eps < Scalar(1)))
    throw InputError("low_defect_contraction: eps must lie in (0, 1)");
  detail::require_strict_contraction("low_defect_contraction", u);

  const auto spec = symmetric_eigen(defect_operator(u));
  const auto proj = spectral_projection(spec, Interval<Scalar>::below(Scalar(1) - eps));

  CertifiedContraction<Scalar> out;
  out.projection = proj.projection;
  out.rank = proj.rank;
  out.contraction = (Matrix::Identity(u.rows(), u.cols()) - u) * proj.projection;
  out.norm = operator_norm(out.contraction);
  using std::sqrt;
  out.bound = sqrt(Scalar(1) - eps);
  if (out.norm > out.bound + Scalar(kCertificateSlack))
    throw NumericError("low_defect_contraction: norm certificate failed");
  return out;
}

/// T = (I - U)^{-1} R where R projects onto (I - U) P(R^d) and P selects the
/// defect spectrum above 1 + eps. Guarantees ||T|| <= 1 / sqrt(1 + eps).
template <typename Derived>
CertifiedContraction<typename Derived::Scalar>
high_defect_contraction(const Eigen::MatrixBase<Derived> &u,
                        typename Derived::Scalar eps) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  using Index = Eigen::Index;
  if (!(eps > Scalar(0)))
    throw InputError("high_defect_contraction: eps must be positive");
  detail::require_strict_contraction("high_defect_contraction", u);

  const Index d = u.rows();
  const Matrix id_minus_u = Matrix::Identity(d, d) - u;
  const auto spec = symmetric_eigen(defect_operator(u));
  const auto proj = spectral_projection(spec, Interval<Scalar>::above(Scalar(1) + eps));

  CertifiedContraction<Scalar> out;
  out.projection = proj.projection;
  out.rank = proj.rank;
  out.range_projection = Matrix::Zero(d, d);
  if (proj.rank > 0) {
    // The selected eigenvectors span the range of P; push them through I - U
    // and orthonormalize.
    Matrix image(d, proj.rank);
    Index c = 0;
    for (Index k = 0; k < d; ++k)
      if (proj.interval.contains(spec.eigenvalues(k)))
        image.col(c++) = id_minus_u * spec.eigenvectors.col(k);
    const Eigen::HouseholderQR<Matrix> qr(image);
    const Matrix q = qr.householderQ() * Matrix::Identity(d, proj.rank);
    out.range_projection = q * q.transpose();
  }
  out.contraction = id_minus_u.partialPivLu().solve(out.range_projection);
  out.norm = operator_norm(out.contraction);
  using std::sqrt;
  out.bound = Scalar(1) / sqrt(Scalar(1) + eps);
  if (out.norm > out.bound + Scalar(kCertificateSlack))
    throw NumericError("high_defect_contraction: norm certificate failed");
  return out;
}

/// Number of singular values strictly above tau.
template <typename Derived>
int numerical_rank(const Eigen::MatrixBase<Derived> &a,
                   typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  if (!(tau > Scalar(0)))
    throw InputError("numerical_rank: tau must be positive");
  if (a.size() == 0)
    return 0;
  const Eigen::JacobiSVD<Matrix> svd(a);
  return static_cast<int>((svd.singularValues().array() > tau).count());
}

/// Orthonormal basis (as columns) of the column space of A, keeping left
/// singular vectors whose singular value exceeds the threshold.
template <typename Derived>
typename math_types<typename Derived::Scalar>::Matrix
range_basis(const Eigen::MatrixBase<Derived> &a,
            typename Derived::Scalar threshold) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  if (a.cols() == 0)
    return Matrix(a.rows(), 0);
  const Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  const auto k = static_cast<Eigen::Index>(
      (svd.singularValues().array() > threshold).count());
  return svd.matrixU().leftCols(k);
}

template <typename Derived>
typename Derived::PlainObject matrix_power(const Eigen::MatrixBase<Derived> &a,
                                           int m) {
  detail::require_square("matrix_power", a);
  if (m < 0)
    throw InputError("matrix_power: exponent must be nonnegative");
  typename Derived::PlainObject out =
      Derived::PlainObject::Identity(a.rows(), a.cols());
  for (int i = 0; i < m; ++i)
    out = (out * a).eval();
  return out;
}

} // namespace ifslab
