#include <gtest/gtest.h>

#include <random>

#include "omtk/error.hpp"
#include "omtk/measure.hpp"
#include "oracles/oracles.hpp"

namespace omtk {
namespace {

EmpiricalMeasure cloud(std::vector<double> xs, std::vector<double> w = {}) {
  Matrix p(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) p(static_cast<Eigen::Index>(i), 0) = xs[i];
  if (w.empty()) return EmpiricalMeasure(p);
  return EmpiricalMeasure(p, Eigen::Map<Vector>(w.data(), static_cast<Eigen::Index>(w.size())));
}

TEST(Moments, Dirac) {
  const double y = 2.0;
  const MomentVector m = moments(EmpiricalMeasure::dirac(std::span(&y, 1)), 2);
  EXPECT_EQ(m.at(1, 0), 2.0);
  EXPECT_EQ(m.at(2, 0), 4.0);
}

TEST(Moments, Symmetric) { EXPECT_EQ(moments(cloud({0, 2}), 1).at(1, 0), 1.0); }

TEST(Moments, WeightedAgainstBruteForce) {
  const std::vector<double> xs{1, 2, 3}, ws{0.2, 0.3, 0.5};
  double m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    m1 += ws[i] * xs[i];
    m2 += ws[i] * xs[i] * xs[i];
  }
  const MomentVector m = moments(cloud(xs, ws), 2);
  EXPECT_NEAR(m.at(1, 0), m1, 1e-15);
  EXPECT_NEAR(m.at(2, 0), m2, 1e-15);
  EXPECT_NEAR(m.at(1, 0), 2.3, 1e-14);
  EXPECT_NEAR(m.at(2, 0), 5.9, 1e-14);
}

TEST(Moments, LinearInWeightsAndJensen) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.01, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(6), w1(6), w2(6);
    double s1 = 0, s2 = 0;
    for (int i = 0; i < 6; ++i) {
      xs[i] = n(rng);
      w1[i] = u(rng);
      w2[i] = u(rng);
      s1 += w1[i];
      s2 += w2[i];
    }
    std::vector<double> mix(6);
    for (int i = 0; i < 6; ++i) {
      w1[i] /= s1;
      w2[i] /= s2;
      mix[i] = 0.3 * w1[i] + 0.7 * w2[i];
    }
    const MomentVector a = moments(cloud(xs, w1), 2), b = moments(cloud(xs, w2), 2),
                       c = moments(cloud(xs, mix), 2);
    for (int k = 1; k <= 2; ++k) EXPECT_NEAR(c.at(k, 0), 0.3 * a.at(k, 0) + 0.7 * b.at(k, 0), 1e-13);
    EXPECT_GE(c.at(2, 0), c.at(1, 0) * c.at(1, 0));
  }
}

TEST(Measure, RejectsBadWeights) {
  EXPECT_THROW(cloud({0, 1}, {0.5, 0.6}), InputError);
  EXPECT_THROW(cloud({0, 1}, {-0.5, 1.5}), InputError);
}

TEST(Wasserstein, TwoDiracs) {
  EXPECT_DOUBLE_EQ(wasserstein2_1d(cloud({1.5}), cloud({-2.0})), 3.5);
}

TEST(Wasserstein, SmallCloudsExhaustive) {
  EXPECT_DOUBLE_EQ(oracle::w2_bruteforce({0, 2}, {1, 3}), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein2_1d(cloud({0, 2}), cloud({1, 3})), 1.0);
}

TEST(Wasserstein, Identity) { EXPECT_EQ(wasserstein2_1d(cloud({3, -1, 2}), cloud({3, -1, 2})), 0.0); }

TEST(Wasserstein, SortedMatchingEqualsBruteForce) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int size = 1; size <= 7; ++size) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> x(size), y(size);
      for (int i = 0; i < size; ++i) {
        x[i] = n(rng);
        y[i] = n(rng);
      }
      EXPECT_NEAR(wasserstein2_1d(cloud(x), cloud(y)), oracle::w2_bruteforce(x, y), 1e-12);
    }
  }
}

TEST(Wasserstein, MetricAxioms) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  auto draw = [&] {
    std::vector<double> v(5);
    for (double& x : v) x = n(rng);
    return cloud(v);
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = draw(), b = draw(), c = draw();
    EXPECT_EQ(wasserstein2_1d(a, b), wasserstein2_1d(b, a));
    EXPECT_LE(wasserstein2_1d(a, c), wasserstein2_1d(a, b) + wasserstein2_1d(b, c) + 1e-12);
    EXPECT_LE(wasserstein2_1d(a, a), 1e-12);
  }
}

TEST(Wasserstein, GeneralWeights) {
  // Mass 1/2 at 0 and 1/2 at 1 against all mass at 1: sqrt(1/2).
  EXPECT_NEAR(wasserstein2_1d(cloud({0, 1}, {0.5, 0.5}), cloud({1})), std::sqrt(0.5), 1e-15);
}

TEST(Wasserstein, MultiDimensionalUnsupported) {
  EXPECT_THROW(wasserstein2_1d(EmpiricalMeasure(Matrix::Zero(2, 2)),
                               EmpiricalMeasure(Matrix::Zero(2, 2))),
               UnsupportedError);
}

TEST(DiracPath, InterpolatesAndMatchesDiracs) {
  const Grid grid = Grid::with_steps(1.0, 4);
  Matrix phi(5, 1), psi(5, 1);
  for (int n = 0; n < 5; ++n) {
    phi(n, 0) = grid.time(n);
    psi(n, 0) = -2.0 * grid.time(n);
  }
  const EmpiricalMeasure mu = dirac_path_measure(grid, phi, 0.5);
  ASSERT_EQ(mu.size(), 1);
  EXPECT_EQ(mu.particles()(0, 0), 0.5);
  EXPECT_EQ(moments(mu, 1).at(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(dirac_path_measure(grid, phi, 0.6).particles()(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(wasserstein2_1d(mu, dirac_path_measure(grid, psi, 0.5)), 1.5);
}

}  // namespace
}  // namespace omtk
