#include <gtest/gtest.h>

#include "omtk/rng.hpp"

namespace omtk {
namespace {

// Published Philox4x32-10 known-answer vectors.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                       {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                       {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Normals, AddressedDrawsAreStable) {
  std::vector<double> a(5), b(3);
  normals(42, Stream::brownian, 7, 3, a);
  normals(42, Stream::brownian, 7, 3, b);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a[i], b[i]);
  std::vector<double> c(5);
  normals(42, Stream::initial, 7, 3, c);
  EXPECT_NE(a[0], c[0]);
}

TEST(Normals, MomentsOverManyDraws) {
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  std::vector<double> z(2);
  for (int i = 0; i < n / 2; ++i) {
    normals(1, Stream::property, static_cast<std::uint64_t>(i), 0, z);
    for (double v : z) {
      s += v;
      s2 += v * v;
      s4 += v * v * v * v;
    }
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(Uniform, OpenUnitInterval) {
  double lo = 1, hi = 0, sum = 0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = uniform(5, Stream::directions, i, 0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 1e5, 0.5, 4.0 * std::sqrt(1.0 / 12 / 1e5));
}

}  // namespace
}  // namespace omtk
