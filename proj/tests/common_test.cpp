// Copyright 2026 The dpstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "dpstore/common.hpp"
#include "dpstore/random.hpp"
#include "dpstore/rational.hpp"

namespace dpstore {
namespace {

TEST(ChaChaRng, SeededStreamsReplay) {
  ChaChaRng a(7, "x"), b(7, "x");
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(ChaChaRng, LabelsAndSeedsSeparateStreams) {
  ChaChaRng a(7, "x"), b(7, "y"), c(8, "x");
  EXPECT_NE(a(), b());
  ChaChaRng a2(7, "x");
  EXPECT_NE(a2(), c());
}

TEST(ChaChaRng, DeriveIsDeterministicAndDistinct) {
  const ChaChaRng root(3);
  ChaChaRng x = root.derive("coin"), y = root.derive("coin"), z = root.derive("dummy");
  ChaChaRng i0 = root.derive(std::uint64_t{0}), i1 = root.derive(std::uint64_t{1});
  const auto vx = x();
  EXPECT_EQ(vx, y());
  EXPECT_NE(vx, z());
  EXPECT_NE(i0(), i1());
}

TEST(ChaChaRng, BelowStaysInRangeAndCoversIt) {
  ChaChaRng rng(11);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  // Each cell has mean 10^4 and sd ~93; 6 sd is generous.
  for (int h : hits) EXPECT_NEAR(h, 10000, 560);
  for (int i = 0; i < 1000; ++i) {
    auto v = rng.index(5);
    ASSERT_GE(v, 1u);
    ASSERT_LE(v, 5u);
  }
}

TEST(ChaChaRng, UnitInHalfOpenInterval) {
  ChaChaRng rng(5);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    double u = rng.unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(ChaChaRng, FromOsDiffers) {
  auto a = ChaChaRng::from_os(), b = ChaChaRng::from_os();
  EXPECT_NE(a(), b());
}

TEST(Rational, ParseAndPrint) {
  EXPECT_EQ(parse_rational("1/2"), Rational(1, 2));
  EXPECT_EQ(parse_rational("6/4"), Rational(3, 2));
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_THROW(parse_rational("1/0"), ParameterError);
  EXPECT_THROW(parse_rational("abc"), ParameterError);
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("-1.5"), Rational(-3, 2));
  EXPECT_EQ(parse_rational(".5"), Rational(1, 2));
  EXPECT_THROW(parse_rational("1."), ParameterError);
  EXPECT_EQ(to_string(Rational(3, 6)), "1/2");
}

TEST(Rational, FromDoubleIsExact) {
  EXPECT_EQ(rational_from_double(0.5), Rational(1, 2));
  EXPECT_EQ(rational_from_double(-3.0), Rational(-3));
  EXPECT_EQ(rational_from_double(0.0), Rational(0));
  const double x = 0.1;
  EXPECT_EQ(to_double(rational_from_double(x)), x);
  EXPECT_NE(rational_from_double(x), Rational(1, 10));
}

TEST(Rational, Binomial) {
  EXPECT_EQ(binomial(6, 3), 20);
  EXPECT_EQ(binomial(5, 0), 1);
  EXPECT_EQ(binomial(3, 5), 0);
  EXPECT_EQ(binomial(100, 50), BigInt("100891344545564193334812497256"));
}

TEST(Hex, RoundTrip) {
  Bytes b{0x00, 0x7f, 0xff, 0x10};
  EXPECT_EQ(to_hex(b), "007fff10");
  EXPECT_EQ(from_hex("007FFF10"), b);
  EXPECT_THROW(from_hex("abc"), ParameterError);
  EXPECT_THROW(from_hex("zz"), ParameterError);
}

}  // namespace
}  // namespace dpstore
