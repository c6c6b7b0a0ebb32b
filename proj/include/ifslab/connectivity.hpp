#pragma once

#include "ifslab/ifs.hpp"

#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace ifslab {

enum class VerdictKind { Disconnected, Connected, Undecided };

/// Tri-state connectivity decision.
///
/// Disconnected carries the certified gap, Undecided the smallest observed
/// distance between computed pieces, Connected the tag of the algebraic
/// witness that proves it.
template <typename Scalar = double> struct Verdict {
  VerdictKind kind = VerdictKind::Undecided;
  Scalar value = 0;
  std::string witness;

  static Verdict disconnected(Scalar gap) { return {VerdictKind::Disconnected, gap, {}}; }
  static Verdict undecided(Scalar mingap) { return {VerdictKind::Undecided, mingap, {}}; }
  static Verdict connected(std::string tag) {
    return {VerdictKind::Connected, Scalar(0), std::move(tag)};
  }
};

template <typename Scalar = double> struct PiecePair {
  int i = 0, j = 0;
  Scalar min_distance = 0;
  Scalar slack = 0;
  bool edge = false;
};

/// Intersection graph of the computed pieces f_i(cloud), relaxed by the slack
/// each true piece may have moved.
template <typename Scalar = double> struct FamilyGraph {
  int nodes = 0;
  std::vector<PiecePair<Scalar>> pairs;

  /// Component label per node: the smallest node index in its component.
  std::vector<int> components() const {
    std::vector<int> parent(static_cast<std::size_t>(nodes));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto &p : pairs)
      if (p.edge) {
        const int a = find(p.i), b = find(p.j);
        parent[std::max(a, b)] = std::min(a, b);
      }
    std::vector<int> label(static_cast<std::size_t>(nodes));
    for (int v = 0; v < nodes; ++v)
      label[v] = find(v);
    return label;
  }

  bool connected() const {
    const auto label = components();
    for (int v : label)
      if (v != 0)
        return false;
    return true;
  }
};

template <typename Scalar>
FamilyGraph<Scalar> family_graph(const IfsSystem<Scalar> &sys,
                                 const AttractorApprox<Scalar> &approx) {
  if (sys.dim() != approx.cloud.dim())
    throw DimensionMismatch("family_graph", sys.dim(), approx.cloud.dim());
  std::vector<PointCloud<Scalar>> pieces;
  pieces.reserve(sys.size());
  for (const auto &f : sys.maps())
    pieces.push_back(apply_map(f, approx.cloud));

  FamilyGraph<Scalar> g;
  g.nodes = static_cast<int>(sys.size());
  for (int i = 0; i < g.nodes; ++i)
    for (int j = i + 1; j < g.nodes; ++j) {
      PiecePair<Scalar> p;
      p.i = i;
      p.j = j;
      p.min_distance = min_distance(pieces[i], pieces[j]);
      p.slack = (sys[i].lip() + sys[j].lip()) * approx.radius;
      // Ties count as touching.
      p.edge = p.min_distance <= p.slack;
      g.pairs.push_back(p);
    }
  return g;
}

/// Geometric classification. Only disconnection is certified from geometry;
/// a one-map attractor is a single point and hence connected.
template <typename Scalar>
Verdict<Scalar> classify(const IfsSystem<Scalar> &sys,
                         const AttractorApprox<Scalar> &approx) {
  const auto g = family_graph(sys, approx);
  if (g.nodes == 1)
    return Verdict<Scalar>::connected("single-map");

  const auto label = g.components();
  Scalar gap = std::numeric_limits<Scalar>::infinity();
  Scalar mingap = std::numeric_limits<Scalar>::infinity();
  bool split = false;
  for (const auto &p : g.pairs) {
    mingap = std::min(mingap, p.min_distance);
    if (label[p.i] != label[p.j]) {
      split = true;
      gap = std::min(gap, p.min_distance - p.slack);
    }
  }
  if (split)
    return Verdict<Scalar>::disconnected(gap);
  return Verdict<Scalar>::undecided(mingap);
}

/// (f1, f2) -> (f1^m, f2).
template <typename Scalar>
IfsSystem<Scalar> iterate_first_map(const IfsSystem<Scalar> &sys, int m) {
  using Matrix = typename math_types<Scalar>::Matrix;
  using Vector = typename math_types<Scalar>::Vector;
  if (sys.size() != 2)
    throw InputError("iterate_first_map: system must have exactly two maps");
  if (m < 1)
    throw InputError("iterate_first_map: m must be positive");
  if (m == 1)
    return sys;

  const auto &f = sys[0];
  Matrix a = f.matrix();
  Vector b = f.offset();
  for (int i = 1; i < m; ++i) {
    b = f.matrix() * b + f.offset();
    a = (f.matrix() * a).eval();
  }
  using std::pow;
  const Scalar computed = operator_norm(a) + Scalar(kLipInflation);
  const Scalar lip = std::min(computed, pow(f.lip(), Scalar(m)));
  return IfsSystem<Scalar>({AffineContraction<Scalar>(std::move(a), std::move(b), lip), sys[1]});
}

/// Membership proof for an attractor point: start at the fixed point of map
/// `fixed_map`, then apply the maps listed in `chain` in order.
struct MembershipCertificate {
  int fixed_map = 0;
  std::vector<int> chain;
};

/// Points p, q of the attractor of (f1^m, f2) with f1^m(p) = f2(q).
template <typename Scalar = double> struct Witness {
  IFSLAB_EIGEN_TYPEDEFS(Scalar);
  std::string tag;
  int m = 1;
  Vector p, q;
  MembershipCertificate p_cert, q_cert;
};

class WitnessRejected : public NumericError {
public:
  using NumericError::NumericError;
};

inline constexpr double kWitnessTolerance = 1e-10;

namespace detail {

template <typename Scalar>
void verify_membership(const IfsSystem<Scalar> &sys,
                       const typename math_types<Scalar>::Vector &point,
                       const MembershipCertificate &cert, const char *name) {
  auto valid = [&](int k) { return k >= 0 && std::size_t(k) < sys.size(); };
  if (!valid(cert.fixed_map))
    throw WitnessRejected(std::string("attach_witness: bad fixed-map index for ") + name);
  if (point.size() != sys.dim())
    throw DimensionMismatch("attach_witness", sys.dim(), point.size());
  typename math_types<Scalar>::Vector x = fixed_point(sys[std::size_t(cert.fixed_map)]);
  for (int k : cert.chain) {
    if (!valid(k))
      throw WitnessRejected(std::string("attach_witness: bad chain index for ") + name);
    x = sys[std::size_t(k)](x);
  }
  if (!((x - point).norm() <= Scalar(kWitnessTolerance)))
    throw WitnessRejected(std::string("attach_witness: ") + name +
                          " is not a certified attractor member");
}

} // namespace detail

/// Verifies an intersection witness for (f1^m, f2) and lifts it: the pieces of
/// the iterated system meet, so it is connected, and connectivity passes back
/// to (f1, f2).
template <typename Scalar>
Verdict<Scalar> attach_witness(const IfsSystem<Scalar> &sys,
                               const Witness<Scalar> &witness) {
  const IfsSystem<Scalar> lifted = iterate_first_map(sys, witness.m);
  detail::verify_membership(lifted, witness.p, witness.p_cert, "p");
  detail::verify_membership(lifted, witness.q, witness.q_cert, "q");
  const Scalar residual = (lifted[0](witness.p) - lifted[1](witness.q)).norm();
  if (!(residual <= Scalar(kWitnessTolerance)))
    throw WitnessRejected("attach_witness: image residual " + std::to_string(double(residual)) +
                          " exceeds 1e-10");
  return Verdict<Scalar>::connected(witness.tag);
}

/// Classification with an attached witness. A geometric disconnection
/// certificate contradicting a valid witness indicates a soundness bug.
template <typename Scalar>
Verdict<Scalar> classify(const IfsSystem<Scalar> &sys,
                         const AttractorApprox<Scalar> &approx,
                         const Witness<Scalar> &witness) {
  const auto verdict = attach_witness(sys, witness);
  if (classify(sys, approx).kind == VerdictKind::Disconnected)
    throw NumericError("classify: witness contradicts geometric disconnection");
  return verdict;
}

} // namespace ifslab
