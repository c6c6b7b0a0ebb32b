#pragma once

#include "ifslab/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace ifslab {

/// Finite nonempty set of points in R^d, stored column-wise (d x n).
///
/// This is the computational stand-in for a nonempty compact set; every
/// consumer that needs a statement about the true set carries its own
/// Hausdorff error bound alongside the cloud.
template <typename Scalar = double> class PointCloud {
public:
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  using Index = Eigen::Index;

  explicit PointCloud(Matrix points) : points_(std::move(points)) {
    if (points_.rows() < 1)
      throw InputError("PointCloud: dimension must be at least 1");
    if (points_.cols() < 1)
      throw InputError("PointCloud: cloud must be nonempty");
    if (!points_.allFinite())
      throw InputError("PointCloud: non-finite coordinate");
  }

  static PointCloud single(const VectorRef &p) {
    Matrix m = p;
    return PointCloud(std::move(m));
  }

  Index dim() const { return points_.rows(); }
  Index size() const { return points_.cols(); }
  const Matrix &points() const { return points_; }
  auto point(Index i) const { return points_.col(i); }

  friend bool operator==(const PointCloud &a, const PointCloud &b) {
    return a.points_.rows() == b.points_.rows() &&
           a.points_.cols() == b.points_.cols() && a.points_ == b.points_;
  }

private:
  Matrix points_;
};

using PointCloudd = PointCloud<double>;

/// Decimation length scale; strictly positive.
template <typename Scalar = double> class Resolution {
public:
  explicit Resolution(Scalar rho) : rho_(rho) {
    if (!(rho > Scalar(0)) || !std::isfinite(static_cast<double>(rho)))
      throw InputError("Resolution: rho must be positive and finite");
  }
  Scalar value() const { return rho_; }

private:
  Scalar rho_;
};

namespace detail {

template <typename Scalar>
inline void require_same_dim(const char *where, const PointCloud<Scalar> &a,
                             const PointCloud<Scalar> &b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch(where, a.dim(), b.dim());
}

// Both the brute-force and the tree kernels evaluate distances through this
// one expression, so their minima agree bit for bit on the same pair.
template <typename A, typename B>
inline typename A::Scalar point_distance(const Eigen::MatrixBase<A> &a,
                                         const Eigen::MatrixBase<B> &b) {
  return (a - b).norm();
}

// Above this many candidate pairs the tree path is used.
inline constexpr long kBruteForcePairLimit = 1L << 16;

} // namespace detail

/// Static k-d tree over the columns of a point matrix, answering exact
/// nearest-neighbour distance queries.
template <typename Scalar = double> class NearestIndex {
public:
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  using Index = Eigen::Index;

  explicit NearestIndex(const Matrix &points) : points_(points) {
    perm_.resize(static_cast<std::size_t>(points.cols()));
    std::iota(perm_.begin(), perm_.end(), Index{0});
    nodes_.reserve(2 * perm_.size() / kLeafSize + 2);
    build(0, static_cast<Index>(perm_.size()));
  }

  /// Distance from q to the nearest indexed point, or `upper` if no point is
  /// closer than that. Stops early once a distance <= stop_below is found.
  template <typename Q>
  Scalar nearest(const Eigen::MatrixBase<Q> &q, Scalar stop_below = Scalar(-1),
                 Scalar upper = std::numeric_limits<Scalar>::infinity()) const {
    Scalar best = upper;
    search(0, q, best, stop_below);
    return best;
  }

private:
  static constexpr Index kLeafSize = 16;

  struct Node {
    Index begin, end;
    int axis = -1; // -1 marks a leaf
    Scalar split = 0;
    int left = -1, right = -1;
  };

  int build(Index begin, Index end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize)
      return id;

    int axis = 0;
    Scalar widest = -1;
    for (Index k = 0; k < points_.rows(); ++k) {
      Scalar lo = std::numeric_limits<Scalar>::infinity(), hi = -lo;
      for (Index i = begin; i < end; ++i) {
        const Scalar v = points_(k, perm_[i]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = static_cast<int>(k);
      }
    }
    if (widest <= 0)
      return id; // all points coincide

    const Index mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid,
                     perm_.begin() + end, [&](Index a, Index b) {
                       return points_(axis, a) < points_(axis, b);
                     });
    const Scalar split = points_(axis, perm_[mid]);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    Node &n = nodes_[id];
    n.axis = axis;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
  }

  template <typename Q>
  void search(int id, const Eigen::MatrixBase<Q> &q, Scalar &best,
              Scalar stop_below) const {
    const Node &n = nodes_[id];
    if (n.axis < 0) {
      for (Index i = n.begin; i < n.end; ++i) {
        const Scalar d = detail::point_distance(q, points_.col(perm_[i]));
        if (d < best)
          best = d;
      }
      return;
    }
    const Scalar diff = q(n.axis) - n.split;
    const int near = diff < 0 ? n.left : n.right;
    const int far = diff < 0 ? n.right : n.left;
    search(near, q, best, stop_below);
    if (best <= stop_below)
      return;
    // Slightly relaxed bound so rounding in the plane distance never prunes
    // the true nearest point.
    if (std::abs(diff) <= best * (Scalar(1) + Scalar(1e-12)))
      search(far, q, best, stop_below);
  }

  const Matrix &points_;
  std::vector<Index> perm_;
  std::vector<Node> nodes_;
};

/// sup over a in A of the distance from a to B, brute force.
template <typename Scalar>
Scalar directed_distance_brute(const PointCloud<Scalar> &a,
                               const PointCloud<Scalar> &b) {
  detail::require_same_dim("directed_distance", a, b);
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index j = 0; j < b.size(); ++j)
      best = std::min(best, detail::point_distance(a.point(i), b.point(j)));
    worst = std::max(worst, best);
  }
  return worst;
}

template <typename Scalar>
Scalar directed_distance_indexed(const PointCloud<Scalar> &a,
                                 const PointCloud<Scalar> &b) {
  detail::require_same_dim("directed_distance", a, b);
  const NearestIndex<Scalar> index(b.points());
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, index.nearest(a.point(i)));
  return worst;
}

template <typename Scalar>
Scalar directed_distance(const PointCloud<Scalar> &a,
                         const PointCloud<Scalar> &b) {
  if (a.size() * b.size() <= detail::kBruteForcePairLimit)
    return directed_distance_brute(a, b);
  return directed_distance_indexed(a, b);
}

/// Hausdorff-Pompeiu distance between two clouds.
template <typename Scalar>
Scalar hausdorff_distance(const PointCloud<Scalar> &a,
                          const PointCloud<Scalar> &b) {
  detail::require_same_dim("hausdorff_distance", a, b);
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

template <typename Scalar>
Scalar min_distance_brute(const PointCloud<Scalar> &a,
                          const PointCloud<Scalar> &b) {
  detail::require_same_dim("min_distance", a, b);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      best = std::min(best, detail::point_distance(a.point(i), b.point(j)));
  return best;
}

template <typename Scalar>
Scalar min_distance_indexed(const PointCloud<Scalar> &a,
                            const PointCloud<Scalar> &b) {
  detail::require_same_dim("min_distance", a, b);
  const bool a_larger = a.size() >= b.size();
  const PointCloud<Scalar> &indexed = a_larger ? a : b;
  const PointCloud<Scalar> &queries = a_larger ? b : a;
  const NearestIndex<Scalar> index(indexed.points());
  // Bit-reversed visiting order spreads the early queries over the whole
  // cloud, so the running bound tightens quickly and prunes later searches.
  const auto m = static_cast<std::uint64_t>(queries.size());
  int bits = 0;
  while ((std::uint64_t{1} << bits) < m)
    ++bits;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << bits) && best > 0; ++i) {
    std::uint64_t j = 0;
    for (int b = 0; b < bits; ++b)
      j |= ((i >> b) & 1u) << (bits - 1 - b);
    if (j < m)
      best = index.nearest(queries.point(static_cast<Eigen::Index>(j)), Scalar(0), best);
  }
  return best;
}

/// Smallest pairwise distance between the two clouds.
template <typename Scalar>
Scalar min_distance(const PointCloud<Scalar> &a, const PointCloud<Scalar> &b) {
  if (a.size() * b.size() <= detail::kBruteForcePairLimit)
    return min_distance_brute(a, b);
  return min_distance_indexed(a, b);
}

/// Grid decimation anchored at the origin.
///
/// Cells are axis-aligned cubes whose full diagonal is at most rho; each
/// occupied cell keeps its lexicographically smallest member. The result is
/// a subset of the input with hausdorff_distance(a, result) <= rho, ordered by
/// cell key, and independent of the input order.
template <typename Scalar>
PointCloud<Scalar> decimate(const PointCloud<Scalar> &a,
                            Resolution<Scalar> rho) {
  using Matrix = typename PointCloud<Scalar>::Matrix;
  using Index = Eigen::Index;
  const Index d = a.dim();
  const Index n = a.size();
  using std::sqrt;
  const Scalar side = rho.value() / sqrt(Scalar(d)) * (Scalar(1) - Scalar(1e-9));

  constexpr double kKeyLimit = 4.0e18;
  std::vector<std::int64_t> keys(static_cast<std::size_t>(n * d));
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) {
      using std::floor;
      const Scalar cell = floor(a.points()(k, i) / side);
      if (std::abs(static_cast<double>(cell)) > kKeyLimit)
        throw NumericError("decimate: coordinate too large for resolution");
      keys[static_cast<std::size_t>(i * d + k)] =
          static_cast<std::int64_t>(cell);
    }

  auto key_of = [&](Index i) { return &keys[static_cast<std::size_t>(i * d)]; };
  auto key_less = [&](Index x, Index y) {
    return std::lexicographical_compare(key_of(x), key_of(x) + d, key_of(y), key_of(y) + d);
  };
  auto point_less = [&](Index x, Index y) {
    const auto px = a.point(x), py = a.point(y);
    return std::lexicographical_compare(px.data(), px.data() + d, py.data(), py.data() + d);
  };

  // Open-addressing table from cell key to the smallest point seen in it.
  std::size_t capacity = 16;
  while (capacity < 2 * static_cast<std::size_t>(n))
    capacity *= 2;
  std::vector<Index> table(capacity, Index{-1});
  for (Index i = 0; i < n; ++i) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Index k = 0; k < d; ++k) {
      h ^= static_cast<std::uint64_t>(key_of(i)[k]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdULL;
    }
    std::size_t slot = static_cast<std::size_t>(h ^ (h >> 32)) & (capacity - 1);
    while (true) {
      Index &entry = table[slot];
      if (entry < 0) {
        entry = i;
        break;
      }
      if (std::equal(key_of(entry), key_of(entry) + d, key_of(i))) {
        if (point_less(i, entry))
          entry = i;
        break;
      }
      slot = (slot + 1) & (capacity - 1);
    }
  }

  std::vector<Index> kept;
  for (Index entry : table)
    if (entry >= 0)
      kept.push_back(entry);
  std::sort(kept.begin(), kept.end(), key_less);

  Matrix out(d, static_cast<Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i)
    out.col(static_cast<Index>(i)) = a.point(kept[i]);
  return PointCloud<Scalar>(std::move(out));
}

} // namespace ifslab
