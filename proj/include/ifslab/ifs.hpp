#pragma once

#include "ifslab/geometry.hpp"
#include "ifslab/operators.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace ifslab {

/// Inflation added to computed operator norms so that lip stays an upper
/// bound on the true Lipschitz factor.
inline constexpr double kLipInflation = 1e-12;
inline constexpr double kFixedPointTolerance = 1e-10;

/// x -> matrix * x + offset with a certified Lipschitz factor lip < 1.
template <typename Scalar = double> class AffineContraction {
public:
  IFSLAB_EIGEN_TYPEDEFS(Scalar);

  AffineContraction(Matrix matrix, Vector offset)
      : matrix_(std::move(matrix)), offset_(std::move(offset)) {
    validate_shape();
    lip_ = operator_norm(matrix_) + Scalar(kLipInflation);
    validate_lip();
  }

  /// Uses a caller-supplied certified bound, which must not undercut the
  /// computed norm.
  AffineContraction(Matrix matrix, Vector offset, Scalar lip)
      : matrix_(std::move(matrix)), offset_(std::move(offset)), lip_(lip) {
    validate_shape();
    if (lip_ < operator_norm(matrix_))
      throw NumericError("AffineContraction: supplied lip is below the operator norm");
    validate_lip();
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const Matrix &matrix() const { return matrix_; }
  const Vector &offset() const { return offset_; }
  Scalar lip() const { return lip_; }

  template <typename Derived>
  Vector operator()(const Eigen::MatrixBase<Derived> &x) const {
    return matrix_ * x + offset_;
  }

private:
  void validate_shape() const {
    detail::require_square("AffineContraction", matrix_);
    if (matrix_.rows() < 1)
      throw InputError("AffineContraction: dimension must be at least 1");
    if (offset_.size() != matrix_.rows())
      throw DimensionMismatch("AffineContraction offset", matrix_.rows(), offset_.size());
    if (!offset_.allFinite())
      throw InputError("AffineContraction: non-finite offset");
  }
  void validate_lip() const {
    if (!(lip_ < Scalar(1)))
      throw NumericError("AffineContraction: operator norm must be < 1");
  }

  Matrix matrix_;
  Vector offset_;
  Scalar lip_ = 0;
};

/// Finite family of affine contractions on R^d.
template <typename Scalar = double> class IfsSystem {
public:
  using Map = AffineContraction<Scalar>;

  explicit IfsSystem(std::vector<Map> maps) : maps_(std::move(maps)) {
    if (maps_.empty())
      throw InputError("IfsSystem: needs at least one map");
    for (const auto &f : maps_) {
      if (f.dim() != maps_.front().dim())
        throw DimensionMismatch("IfsSystem", maps_.front().dim(), f.dim());
      lambda_ = std::max(lambda_, f.lip());
    }
  }

  std::size_t size() const { return maps_.size(); }
  Eigen::Index dim() const { return maps_.front().dim(); }
  Scalar lambda() const { return lambda_; }
  const std::vector<Map> &maps() const { return maps_; }
  const Map &operator[](std::size_t i) const { return maps_[i]; }

private:
  std::vector<Map> maps_;
  Scalar lambda_ = 0;
};

/// Cloud plus certified radius: hausdorff(cloud, true attractor) <= radius.
template <typename Scalar = double> struct AttractorApprox {
  PointCloud<Scalar> cloud;
  Scalar radius = 0;
  int iterations = 0;
  Scalar rho = 0;
};

template <typename Scalar = double> struct AttractorOptions {
  /// Decimation resolution; defaults to target_r * (1 - lambda) / 2.
  std::optional<Scalar> rho;
  int max_iterations = 10000;
  Eigen::Index max_points = 20'000'000;
};

template <typename Scalar>
PointCloud<Scalar> apply_map(const AffineContraction<Scalar> &f,
                             const PointCloud<Scalar> &c) {
  if (f.dim() != c.dim())
    throw DimensionMismatch("apply_map", f.dim(), c.dim());
  typename PointCloud<Scalar>::Matrix image = f.matrix() * c.points();
  image.colwise() += f.offset();
  return PointCloud<Scalar>(std::move(image));
}

/// Union of the images of c under every map, concatenated in map order.
template <typename Scalar>
PointCloud<Scalar> hutchinson(const IfsSystem<Scalar> &sys,
                              const PointCloud<Scalar> &c) {
  if (sys.dim() != c.dim())
    throw DimensionMismatch("hutchinson", sys.dim(), c.dim());
  const Eigen::Index n = c.size();
  typename PointCloud<Scalar>::Matrix out(c.dim(), n * Eigen::Index(sys.size()));
  for (std::size_t k = 0; k < sys.size(); ++k) {
    auto block = out.middleCols(Eigen::Index(k) * n, n);
    block.noalias() = sys[k].matrix() * c.points();
    block.colwise() += sys[k].offset();
  }
  return PointCloud<Scalar>(std::move(out));
}

template <typename Scalar>
typename math_types<Scalar>::Vector
fixed_point(const AffineContraction<Scalar> &f) {
  using Matrix = typename math_types<Scalar>::Matrix;
  using Vector = typename math_types<Scalar>::Vector;
  const Matrix system = Matrix::Identity(f.dim(), f.dim()) - f.matrix();
  const Vector x = system.colPivHouseholderQr().solve(f.offset());
  const Scalar residual = (f(x) - x).norm();
  if (!(residual <= Scalar(kFixedPointTolerance) * std::max(Scalar(1), x.norm())))
    throw NumericError("fixed_point: residual exceeds tolerance");
  return x;
}

/// Radius of an origin-centred ball mapped into itself by the system.
template <typename Scalar>
Scalar bounding_radius(const IfsSystem<Scalar> &sys) {
  Scalar worst = 0;
  for (const auto &f : sys.maps())
    worst = std::max(worst, f.offset().norm());
  return worst / (Scalar(1) - sys.lambda());
}

/// Error bound after k decimated Hutchinson steps from a seed whose one-step
/// displacement is h0.
template <typename Scalar>
Scalar attractor_error_bound(Scalar lambda, Scalar h0, Scalar rho, int k) {
  using std::pow;
  const Scalar lk = pow(lambda, Scalar(k));
  return (lk * h0 + rho * (Scalar(1) - lk)) / (Scalar(1) - lambda);
}

/// Certified attractor approximation by decimated Hutchinson iteration.
///
/// Seed C0 = {fixed point of the first map}. With D_k = h(C_k, A) we have
/// D_0 <= h(C0, F(C0)) / (1 - lambda) and D_{k+1} <= lambda D_k + rho, so k is
/// the smallest count whose bound reaches target_r.
template <typename Scalar>
AttractorApprox<Scalar> attractor(const IfsSystem<Scalar> &sys, Scalar target_r,
                                  const AttractorOptions<Scalar> &opts = {}) {
  if (!(target_r > Scalar(0)) || !std::isfinite(static_cast<double>(target_r)))
    throw InputError("attractor: target_r must be positive");
  const Scalar lambda = sys.lambda();
  const Scalar rho = opts.rho.value_or(target_r * (Scalar(1) - lambda) / Scalar(2));
  const Resolution<Scalar> resolution(rho);
  if (!(target_r > rho / (Scalar(1) - lambda)))
    throw NumericError("attractor: infeasible target, need target_r > rho / (1 - lambda)");

  PointCloud<Scalar> cloud = PointCloud<Scalar>::single(fixed_point(sys[0]));
  PointCloud<Scalar> image = hutchinson(sys, cloud);
  const Scalar h0 = hausdorff_distance(cloud, image);

  int k = 0;
  while (attractor_error_bound(lambda, h0, rho, k) > target_r) {
    if (++k > opts.max_iterations)
      throw NumericError("attractor: iteration budget exceeded");
  }

  for (int step = 0; step < k; ++step) {
    if (step > 0)
      image = hutchinson(sys, cloud);
    if (image.size() > opts.max_points)
      throw NumericError("attractor: point budget exceeded");
    cloud = decimate(image, resolution);
  }
  return AttractorApprox<Scalar>{std::move(cloud),
                                 attractor_error_bound(lambda, h0, rho, k), k, rho};
}

} // namespace ifslab
