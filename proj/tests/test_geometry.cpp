#include "ifslab/geometry.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using ifslab::PointCloudd;
using ifslab::Resolution;

namespace {

PointCloudd cloud(const oracle::Points &pts) {
  Eigen::MatrixXd m(pts.front().size(), pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j)
    for (std::size_t k = 0; k < pts[j].size(); ++k)
      m(k, j) = pts[j][k];
  return PointCloudd(m);
}

PointCloudd line(std::initializer_list<double> xs) {
  oracle::Points pts;
  for (double x : xs)
    pts.push_back({x});
  return cloud(pts);
}

PointCloudd sampled_segment(double a, double b, double step) {
  oracle::Points pts;
  for (double x = a; x <= b + 1e-12; x += step)
    pts.push_back({x});
  return cloud(pts);
}

} // namespace

TEST(PointCloud, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(PointCloudd(Eigen::MatrixXd(2, 0)), ifslab::InputError);
  EXPECT_THROW(PointCloudd(Eigen::MatrixXd(0, 3)), ifslab::InputError);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(PointCloudd{m}, ifslab::InputError);
  m(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(PointCloudd{m}, ifslab::InputError);
}

TEST(Resolution, MustBePositive) {
  EXPECT_THROW(Resolution<double>(0.0), ifslab::InputError);
  EXPECT_THROW(Resolution<double>(-1.0), ifslab::InputError);
  EXPECT_NO_THROW(Resolution<double>(1e-9));
}

TEST(DirectedDistance, Examples) {
  EXPECT_DOUBLE_EQ(ifslab::directed_distance(cloud({{0, 0}}), cloud({{3, 4}})), 5.0);
  EXPECT_DOUBLE_EQ(ifslab::directed_distance(line({0, 1}), line({0})), 1.0);
  EXPECT_DOUBLE_EQ(ifslab::directed_distance(line({0}), line({0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(ifslab::directed_distance(line({0, 0.5, 1}), line({0.25, 0.75})), 0.25);
}

TEST(DirectedDistance, DimensionMismatch) {
  EXPECT_THROW(ifslab::directed_distance(line({0}), cloud({{0, 0}})), ifslab::DimensionMismatch);
  EXPECT_THROW(ifslab::hausdorff_distance(line({0}), cloud({{0, 0}})), ifslab::DimensionMismatch);
  EXPECT_THROW(ifslab::min_distance(line({0}), cloud({{0, 0}})), ifslab::DimensionMismatch);
}

TEST(HausdorffDistance, Examples) {
  const auto a = cloud({{0.3, -1}, {2, 5}, {0, 0}});
  EXPECT_EQ(ifslab::hausdorff_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(ifslab::hausdorff_distance(line({0, 1}), line({0})), 1.0);
}

TEST(MinDistance, Examples) {
  EXPECT_EQ(ifslab::min_distance(line({0}), line({0, 1})), 0.0);
  const auto a = sampled_segment(0, 1.0 / 3, 1.0 / 27);
  const auto b = sampled_segment(2.0 / 3, 1, 1.0 / 27);
  EXPECT_NEAR(ifslab::min_distance(a, b), 1.0 / 3, 1e-12);
  EXPECT_DOUBLE_EQ(ifslab::min_distance(cloud({{0, 0}}), cloud({{0, 2}, {1, 0.5}})),
                   0.5 * std::sqrt(5.0));
}

TEST(HausdorffDistance, MatchesOracleOnRandomClouds) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 5;
    const auto a = oracle::random_cloud(rng, d, 1 + trial % 37);
    const auto b = oracle::random_cloud(rng, d, 1 + (trial * 7) % 41);
    EXPECT_NEAR(ifslab::hausdorff_distance(cloud(a), cloud(b)), oracle::hausdorff(a, b), 1e-12);
    EXPECT_NEAR(ifslab::min_distance(cloud(a), cloud(b)), oracle::min_pair(a, b), 1e-12);
  }
}

TEST(HausdorffDistance, MetricAxioms) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 5), size(1, 200);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = dim(rng);
    const auto a = cloud(oracle::random_cloud(rng, d, size(rng)));
    const auto b = cloud(oracle::random_cloud(rng, d, size(rng)));
    const auto c = cloud(oracle::random_cloud(rng, d, size(rng)));
    const double ab = ifslab::hausdorff_distance(a, b);
    ASSERT_EQ(ab, ifslab::hausdorff_distance(b, a));
    ASSERT_EQ(ifslab::hausdorff_distance(a, a), 0.0);
    ASSERT_LE(ifslab::hausdorff_distance(a, c),
              ab + ifslab::hausdorff_distance(b, c) + 1e-12);
    ASSERT_LE(ifslab::directed_distance(a, b), ab);
    ASSERT_LE(ifslab::min_distance(a, b), ifslab::directed_distance(a, b));
  }
}

TEST(HausdorffDistance, TreeAgreesWithBruteForce) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 4;
    const auto a = cloud(oracle::random_cloud(rng, d, 300 + 13 * trial));
    const auto b = cloud(oracle::random_cloud(rng, d, 250 + 17 * trial, 0.5));
    EXPECT_NEAR(ifslab::directed_distance_indexed(a, b),
                ifslab::directed_distance_brute(a, b), 1e-12);
    EXPECT_NEAR(ifslab::directed_distance_indexed(b, a),
                ifslab::directed_distance_brute(b, a), 1e-12);
    EXPECT_NEAR(ifslab::min_distance_indexed(a, b), ifslab::min_distance_brute(a, b), 1e-12);
  }
}

TEST(HausdorffDistance, TreeHandlesDuplicatesAndFlatClouds) {
  Eigen::MatrixXd m(3, 400);
  for (int j = 0; j < 400; ++j)
    m.col(j) << (j % 20) * 0.1, 0.0, 1.0;
  const PointCloudd flat(m);
  const PointCloudd probe(Eigen::MatrixXd::Random(3, 300));
  EXPECT_NEAR(ifslab::directed_distance_indexed(probe, flat),
              ifslab::directed_distance_brute(probe, flat), 1e-12);
  EXPECT_NEAR(ifslab::min_distance_indexed(probe, flat), ifslab::min_distance_brute(probe, flat),
              1e-12);
}

TEST(Decimate, FineResolutionKeepsEveryPoint) {
  const auto a = line({0.0, 0.3, 0.31, 1.0, -2.0});
  const auto r = ifslab::decimate(a, Resolution<double>(0.005));
  EXPECT_EQ(r.size(), a.size());
  EXPECT_EQ(ifslab::hausdorff_distance(a, r), 0.0);
}

TEST(Decimate, MergesNearbyPoints) {
  const auto a = line({0, 0.001, 1});
  const auto r = ifslab::decimate(a, Resolution<double>(0.01));
  EXPECT_EQ(r.size(), 2);
  EXPECT_LE(ifslab::hausdorff_distance(a, r), 0.01);
}

TEST(Decimate, IndependentOfInputOrder) {
  std::mt19937_64 rng(5);
  auto pts = oracle::random_cloud(rng, 3, 2000);
  const auto first = ifslab::decimate(cloud(pts), Resolution<double>(0.3));
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto second = ifslab::decimate(cloud(pts), Resolution<double>(0.3));
  ASSERT_EQ(first.size(), second.size());
  EXPECT_TRUE(first == second);
}

TEST(Decimate, HausdorffContract) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> rho(0.01, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + trial % 5;
    const auto a = cloud(oracle::random_cloud(rng, d, 1 + trial % 150));
    const double r = rho(rng);
    const auto out = ifslab::decimate(a, Resolution<double>(r));
    ASSERT_LE(ifslab::hausdorff_distance(a, out), r);
    ASSERT_LE(out.size(), a.size());
    // Output is a subset of the input.
    ASSERT_EQ(ifslab::directed_distance(out, a), 0.0);
  }
}

TEST(Decimate, RejectsCoordinatesBeyondKeyRange) {
  const auto a = line({1e300});
  EXPECT_THROW(ifslab::decimate(a, Resolution<double>(1e-300)), ifslab::NumericError);
}

TEST(Geometry, LongDoubleInstantiation) {
  using Cloud = ifslab::PointCloud<long double>;
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> a(1, 2), b(1, 1);
  a << 0.0L, 1.0L;
  b << 0.25L;
  EXPECT_EQ(ifslab::hausdorff_distance(Cloud(a), Cloud(b)), 0.75L);
  EXPECT_EQ(ifslab::decimate(Cloud(a), Resolution<long double>(0.1L)).size(), 2);
}
