#pragma once

#include "ifslab/connectivity.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace ifslab {

/// The two-map family (S x, T x + w).
template <typename Scalar = double> struct SwConfig {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  Matrix s;
  Matrix t;
  Vector w;
};

template <typename Scalar>
IfsSystem<Scalar> build_ifs(const SwConfig<Scalar> &cfg) {
  using Vector = typename math_types<Scalar>::Vector;
  detail::require_square("build_ifs S", cfg.s);
  detail::require_square("build_ifs T", cfg.t);
  if (cfg.t.rows() != cfg.s.rows())
    throw DimensionMismatch("build_ifs T", cfg.s.rows(), cfg.t.rows());
  if (cfg.w.size() != cfg.s.rows())
    throw DimensionMismatch("build_ifs w", cfg.s.rows(), cfg.w.size());
  return IfsSystem<Scalar>({AffineContraction<Scalar>(cfg.s, Vector::Zero(cfg.s.rows())),
                            AffineContraction<Scalar>(cfg.t, cfg.w)});
}

inline constexpr double kWitnessIdentityTolerance = 1e-10;

/// Low-defect construction: T = (I - U) P, w = U P h, e = P h.
/// Then U e = w = f2(0), so the pieces of (U x, T x + w) meet at w.
template <typename Scalar = double> struct ConnectivityWitness {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  CertifiedContraction<Scalar> certificate;
  Vector w;
  Vector e;
  Scalar image_residual = 0;      // ||U e - w||
  Scalar projection_residual = 0; // ||e - P h||

  const Matrix &t() const { return certificate.contraction; }

  Witness<Scalar> witness(int m = 1) const {
    Witness<Scalar> out;
    out.tag = "low-defect";
    out.m = m;
    out.p = e;
    out.p_cert = {1, {}};
    out.q = Vector::Zero(e.size());
    out.q_cert = {0, {}};
    return out;
  }
};

/// High-defect construction: T = (I - U)^{-1} R, w = (I - T) P u.
/// With e = (I - T)^{-1} w the point U e is mapped by f2 to 0 = U 0.
template <typename Scalar = double> struct AnnihilationWitness {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  CertifiedContraction<Scalar> certificate;
  Vector w;
  Vector e;
  Vector ue; // U e, a member of the attractor sent to 0 by f2
  Scalar residual = 0; // ||T U e + w||

  const Matrix &t() const { return certificate.contraction; }

  Witness<Scalar> witness(int m = 1) const {
    Witness<Scalar> out;
    out.tag = "high-defect";
    out.m = m;
    out.p = Vector::Zero(e.size());
    out.p_cert = {0, {}};
    out.q = ue;
    out.q_cert = {1, {0}};
    return out;
  }
};

template <typename Derived, typename VecDerived>
ConnectivityWitness<typename Derived::Scalar>
connectivity_witness(const Eigen::MatrixBase<Derived> &u,
                     typename Derived::Scalar eps,
                     const Eigen::MatrixBase<VecDerived> &h) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  if (h.size() != u.rows())
    throw DimensionMismatch("connectivity_witness h", u.rows(), h.size());

  ConnectivityWitness<Scalar> out;
  out.certificate = low_defect_contraction(u, eps);
  if (out.certificate.rank == 0)
    throw DegenerateError("connectivity_witness: spectral projection is trivial");

  const Matrix &p = out.certificate.projection;
  const Matrix id = Matrix::Identity(u.rows(), u.cols());
  out.w = u * (p * h);
  out.e = (id - out.t()).partialPivLu().solve(out.w);
  out.image_residual = (u * out.e - out.w).norm();
  out.projection_residual = (out.e - p * h).norm();
  if (!(out.image_residual <= Scalar(kWitnessIdentityTolerance) &&
        out.projection_residual <= Scalar(kWitnessIdentityTolerance)))
    throw NumericError("connectivity_witness: identity residual exceeds 1e-10");
  return out;
}

template <typename Derived, typename VecDerived>
AnnihilationWitness<typename Derived::Scalar>
annihilation_witness(const Eigen::MatrixBase<Derived> &u,
                     typename Derived::Scalar eps,
                     const Eigen::MatrixBase<VecDerived> &v) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  if (v.size() != u.rows())
    throw DimensionMismatch("annihilation_witness u", u.rows(), v.size());

  AnnihilationWitness<Scalar> out;
  out.certificate = high_defect_contraction(u, eps);
  if (out.certificate.rank == 0)
    throw DegenerateError("annihilation_witness: spectral projection is trivial");

  const Matrix id = Matrix::Identity(u.rows(), u.cols());
  const Matrix id_minus_t = id - out.t();
  out.w = id_minus_t * (out.certificate.projection * v);
  out.e = id_minus_t.partialPivLu().solve(out.w);
  out.ue = u * out.e;
  out.residual = (out.t() * out.ue + out.w).norm();
  if (!(out.residual <= Scalar(kWitnessIdentityTolerance)))
    throw NumericError("annihilation_witness: identity residual exceeds 1e-10");
  return out;
}

/// Orthonormal basis of one exceptional subspace
/// X_n = (T - I)(T^n - I)^{-1} (range(S) + T^n range(S)).
template <typename Scalar = double> struct ExceptionalSubspace {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  int n = 1;
  Matrix basis; // d x dim, orthonormal columns

  Eigen::Index dim() const { return basis.cols(); }

  template <typename Derived>
  Scalar distance(const Eigen::MatrixBase<Derived> &w) const {
    if (basis.cols() == 0)
      return w.norm();
    return (w - basis * (basis.transpose() * w)).norm();
  }
};

inline constexpr double kRangeThreshold = 1e-10;

template <typename DerivedS, typename DerivedT>
ExceptionalSubspace<typename DerivedS::Scalar>
exceptional_subspace(const Eigen::MatrixBase<DerivedS> &s,
                     const Eigen::MatrixBase<DerivedT> &t, int n) {
  using Scalar = typename DerivedS::Scalar;
  using Matrix = typename math_types<Scalar>::Matrix;
  detail::require_square("exceptional_subspace S", s);
  detail::require_square("exceptional_subspace T", t);
  if (s.rows() != t.rows())
    throw DimensionMismatch("exceptional_subspace", s.rows(), t.rows());
  if (n < 1)
    throw InputError("exceptional_subspace: n must be positive");
  if (operator_norm(t) >= Scalar(1))
    throw NumericError("exceptional_subspace: requires ||T|| < 1");

  const Eigen::Index d = s.rows();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix tn = matrix_power(t, n);
  const Matrix range_s = range_basis(s, Scalar(kRangeThreshold));

  Matrix stacked(d, 2 * range_s.cols());
  stacked << range_s, tn * range_s;
  const Matrix sum_basis = range_basis(stacked, Scalar(kRangeThreshold));

  const Matrix mapped = (t - id) * (tn - id).partialPivLu().solve(sum_basis);
  ExceptionalSubspace<Scalar> out;
  out.n = n;
  out.basis = range_basis(mapped, Scalar(kRangeThreshold));
  return out;
}

template <typename DerivedS, typename DerivedT, typename DerivedW>
typename DerivedS::Scalar
distance_to_exceptional_union(const Eigen::MatrixBase<DerivedS> &s,
                              const Eigen::MatrixBase<DerivedT> &t,
                              const Eigen::MatrixBase<DerivedW> &w, int n_max) {
  using Scalar = typename DerivedS::Scalar;
  if (n_max < 1)
    throw InputError("distance_to_exceptional_union: n_max must be positive");
  if (w.size() != s.rows())
    throw DimensionMismatch("distance_to_exceptional_union", s.rows(), w.size());
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (int n = 1; n <= n_max; ++n)
    best = std::min(best, exceptional_subspace(s, t, n).distance(w));
  return best;
}

// ---------------------------------------------------------------------------
// w-space sweeps

template <typename Scalar = double> struct GridAxis {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  Vector direction;
  Scalar lo = 0, hi = 0;
  int count = 0;

  Scalar value(int i) const {
    if (count <= 1)
      return lo;
    return lo + (hi - lo) * Scalar(i) / Scalar(count - 1);
  }
};

/// w = origin + s1 * axes[0].direction (+ s2 * axes[1].direction).
template <typename Scalar = double> struct SweepGrid {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  Vector origin;
  std::vector<GridAxis<Scalar>> axes;

  int rows() const { return axes.size() > 1 ? axes[1].count : 1; }
  int cols() const { return axes.empty() ? 0 : axes[0].count; }
  int cells() const { return axes.empty() ? 0 : rows() * cols(); }
};

template <typename Scalar = double> struct SweepParams {
  Scalar target_r = Scalar(1e-3);
  AttractorOptions<Scalar> attractor;
  int n_max = 8;
  unsigned threads = 1;
  Scalar far_threshold = Scalar(0.1);
};

template <typename Scalar = double> struct SweepCell {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  int col = 0, row = 0;
  Scalar s1 = 0, s2 = 0;
  Vector w;
  std::optional<Verdict<Scalar>> verdict; // empty when the cell failed
  std::string error;
  Scalar exceptional_distance = 0;
  Scalar radius = 0;
  int iterations = 0;
  Eigen::Index points = 0;
};

/// Verdict counts split by whether the cell lies farther than the threshold
/// from the truncated exceptional union.
struct CrossTab {
  // [kind][near=0/far=1]; kind index 3 counts failed cells
  long counts[4][2] = {};
};

template <typename Scalar = double> struct SweepReport {
  SweepGrid<Scalar> grid;
  int n_max = 8;
  Scalar far_threshold = Scalar(0.1);
  std::vector<SweepCell<Scalar>> cells; // row-major by (row, col)

  CrossTab cross_tab() const {
    CrossTab tab;
    for (const auto &c : cells) {
      const int kind = c.verdict ? static_cast<int>(c.verdict->kind) : 3;
      tab.counts[kind][c.exceptional_distance > far_threshold ? 1 : 0]++;
    }
    return tab;
  }
};

template <typename Scalar>
SweepReport<Scalar> sweep(const typename math_types<Scalar>::Matrix &s,
                          const typename math_types<Scalar>::Matrix &t,
                          const SweepGrid<Scalar> &grid,
                          const SweepParams<Scalar> &params) {
  using Vector = typename math_types<Scalar>::Vector;
  detail::require_square("sweep S", s);
  detail::require_square("sweep T", t);
  const Eigen::Index d = s.rows();
  if (grid.axes.empty() || grid.axes.size() > 2)
    throw InputError("sweep: grid must have one or two axes");
  if (grid.origin.size() != d)
    throw DimensionMismatch("sweep origin", d, grid.origin.size());
  for (const auto &axis : grid.axes) {
    if (axis.direction.size() != d)
      throw DimensionMismatch("sweep axis", d, axis.direction.size());
    if (axis.count < 0)
      throw InputError("sweep: negative axis count");
  }

  SweepReport<Scalar> report;
  report.grid = grid;
  report.n_max = params.n_max;
  report.far_threshold = params.far_threshold;
  const int cells = grid.cells();
  if (cells == 0)
    return report;

  std::vector<ExceptionalSubspace<Scalar>> subspaces;
  for (int n = 1; n <= params.n_max; ++n)
    subspaces.push_back(exceptional_subspace(s, t, n));

  report.cells.resize(static_cast<std::size_t>(cells));
  auto run_cell = [&](int index) {
    SweepCell<Scalar> &cell = report.cells[static_cast<std::size_t>(index)];
    cell.col = index % grid.cols();
    cell.row = index / grid.cols();
    cell.s1 = grid.axes[0].value(cell.col);
    Vector w = grid.origin + cell.s1 * grid.axes[0].direction;
    if (grid.axes.size() > 1) {
      cell.s2 = grid.axes[1].value(cell.row);
      w += cell.s2 * grid.axes[1].direction;
    }
    cell.w = w;
    cell.exceptional_distance = std::numeric_limits<Scalar>::infinity();
    for (const auto &x : subspaces)
      cell.exceptional_distance = std::min(cell.exceptional_distance, x.distance(w));
    try {
      const auto sys = build_ifs(SwConfig<Scalar>{s, t, w});
      const auto approx = attractor(sys, params.target_r, params.attractor);
      cell.radius = approx.radius;
      cell.iterations = approx.iterations;
      cell.points = approx.cloud.size();
      cell.verdict = classify(sys, approx);
    } catch (const Error &e) {
      cell.error = e.what();
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(cells)));
  if (workers == 1) {
    for (int i = 0; i < cells; ++i)
      run_cell(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned k = 0; k < workers; ++k)
      pool.emplace_back([&] {
        for (int i = next++; i < cells; i = next++)
          run_cell(i);
      });
    for (auto &th : pool)
      th.join();
  }
  return report;
}

} // namespace ifslab
