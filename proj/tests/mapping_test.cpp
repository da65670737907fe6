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

#include <bit>
#include <cmath>
#include <set>
#include <string>

#include "dpstore/mapping.hpp"

namespace dpstore::mapping {
namespace {

KeyTag tag_of(std::uint64_t k) {
  KeyTag t{};
  for (int b = 0; b < 8; ++b) t[b] = static_cast<std::uint8_t>(k >> (8 * b));
  t[15] = 0xAA;
  return t;
}

TEST(Layout, Examples) {
  auto a = layout_for(1024);
  EXPECT_EQ(a.L, 16u);
  EXPECT_EQ(a.trees, 64u);
  EXPECT_EQ(a.levels, 5u);
  EXPECT_EQ(a.phi, 32u);
  EXPECT_EQ(a.t, 4u);
  auto b = layout_for(65536);
  EXPECT_EQ(b.L, 16u);
  EXPECT_EQ(b.trees, 4096u);
  EXPECT_EQ(b.levels, 5u);
  EXPECT_EQ(b.phi, 64u);
  EXPECT_EQ(b.node_count(), 4096u * 31);
  EXPECT_EQ(b.slot_count(), 4096u * 31 * 4);
  EXPECT_THROW(layout_for(15), ParameterError);
  EXPECT_THROW(ForestLayout::make(3, 1, 1, 1), ParameterError);
}

TEST(Layout, PowerOfTwoAndCoverage) {
  for (std::uint64_t n = 16; n <= (1u << 20); n = n * 3 / 2 + 1) {
    auto l = layout_for(n);
    ASSERT_TRUE(std::has_single_bit(l.L));
    ASSERT_GE(l.leaves(), n);
    ASSERT_LT(l.leaves() - n, l.L);
    ASSERT_GE(static_cast<double>(l.L), std::log2(static_cast<double>(n)) - 1e-9);
  }
}

TEST(Layout, OrdinalsAreDenseAndInvertible) {
  auto l = ForestLayout::make(8, 3, 2, 4);
  std::set<BlockId> addrs;
  for (std::uint64_t ord = 0; ord < l.node_count(); ++ord) {
    NodeAddr a = node_at(l, ord);
    ASSERT_LT(a.index, l.L >> a.height);
    ASSERT_EQ(node_ordinal(l, a), ord);
    for (std::uint32_t s = 0; s < l.t; ++s) addrs.insert(slot_address(l, a, s));
  }
  EXPECT_EQ(addrs.size(), l.slot_count());
  EXPECT_EQ(*addrs.begin(), 1u);
  EXPECT_EQ(*addrs.rbegin(), l.slot_count());
}

TEST(Layout, BucketPathClimbsToRoot) {
  auto l = ForestLayout::make(16, 2, 4, 8);
  auto p = bucket_path(l, 16 + 11);
  ASSERT_EQ(p.size(), 5u);
  for (std::uint32_t h = 0; h < 5; ++h) {
    EXPECT_EQ(p[h].tree, 1u);
    EXPECT_EQ(p[h].height, h);
    EXPECT_EQ(p[h].index, 11u >> h);
  }
  EXPECT_THROW(bucket_path(l, 32), ParameterError);
}

TEST(Store, ToyTreeTieRule) {
  // One tree, two leaves, one slot per node; every key maps to {0, 1}.
  Forest f(ForestLayout::make(2, 1, 1, 1));
  std::vector<Placement> got;
  for (std::uint64_t k = 0; k < 4; ++k) got.push_back(f.store(tag_of(k), 1, 0));
  EXPECT_EQ(got[0].kind, Placement::Kind::kNode);
  EXPECT_EQ(got[0].node, (NodeAddr{0, 0, 0}));
  EXPECT_EQ(got[1].node, (NodeAddr{0, 0, 1}));
  EXPECT_EQ(got[2].node, (NodeAddr{0, 1, 0}));
  EXPECT_EQ(got[3].kind, Placement::Kind::kSuperRoot);
  EXPECT_EQ(f.store(tag_of(4), 0, 1).kind, Placement::Kind::kFull);
  EXPECT_EQ(f.stored(), 4u);
  EXPECT_EQ(f.super_root_load(), 1u);
}

TEST(Store, EmptyForestPlacesAtLeaf) {
  auto l = layout_for(1024);
  Forest f(l);
  auto p = f.store(tag_of(1), 700, 3);
  EXPECT_EQ(p.kind, Placement::Kind::kNode);
  EXPECT_EQ(p.node.height, 0u);
  EXPECT_EQ(node_ordinal(l, p.node), node_ordinal(l, bucket_path(l, 3)[0]));
  EXPECT_EQ(f.max_height_used(), 0);
}

TEST(Lookup, CoherentWithStoreAndUniformTouches) {
  auto l = layout_for(256);
  Forest f(l);
  auto fn = MappingFn::from_rng(ChaChaRng(3, "lookup"));
  const std::uint64_t per = 2 * l.levels;
  for (std::uint64_t k = 0; k < 200; ++k) {
    auto key = "k" + std::to_string(k);
    auto [a, b] = fn.leaves(key, l.leaves());
    Bytes v(1, static_cast<std::uint8_t>(k));
    auto placed = f.store(tag_of(k), a, b, v);
    auto before = f.node_touches();
    auto found = f.lookup(tag_of(k), a, b);
    ASSERT_EQ(f.node_touches() - before, per);
    ASSERT_TRUE(found.has_value());
    ASSERT_EQ(*found, placed);
    ASSERT_EQ(*f.value(tag_of(k), a, b), v);
  }
  auto before = f.node_touches();
  EXPECT_FALSE(f.lookup(tag_of(999999), 5, 9).has_value());
  EXPECT_EQ(f.node_touches() - before, per);
  before = f.node_touches();
  f.store(tag_of(1000), 1, 2);
  EXPECT_EQ(f.node_touches() - before, per);
}

TEST(Store, ConservationAndNoDuplicates) {
  auto l = layout_for(512);
  Forest f(l);
  auto fn = MappingFn::from_rng(ChaChaRng(8, "cons"));
  std::uint64_t ok = 0;
  for (std::uint64_t k = 0; k < l.n; ++k) {
    auto [a, b] = fn.leaves("u" + std::to_string(k), l.leaves());
    if (f.store(tag_of(k), a, b).kind != Placement::Kind::kFull) ++ok;
  }
  EXPECT_EQ(f.stored(), ok);
  EXPECT_EQ(f.occupied_slots() + f.super_root_load(), ok);
  std::uint64_t summed = 0;
  for (std::uint64_t ord = 0; ord < l.node_count(); ++ord) {
    auto occ = f.occupancy(node_at(l, ord));
    ASSERT_LE(occ, l.t);
    summed += occ;
  }
  EXPECT_EQ(summed, f.occupied_slots());
}

TEST(Histogram, EmptyIsZero) {
  Forest f(layout_for(64));
  for (auto h : f.level_fill_histogram()) EXPECT_EQ(h, 0u);
  EXPECT_EQ(f.max_height_used(), -1);
}

TEST(Prf, Deterministic) {
  auto fn = MappingFn::from_rng(ChaChaRng(1));
  EXPECT_EQ(fn.leaves("alpha", 1000), fn.leaves("alpha", 1000));
  auto again = MappingFn(fn.key1(), fn.key2());
  EXPECT_EQ(fn.leaves("alpha", 1000), again.leaves("alpha", 1000));
  auto tag = TagFn::from_rng(ChaChaRng(2));
  EXPECT_EQ(tag("alpha"), tag("alpha"));
  EXPECT_NE(tag("alpha"), tag("beta"));
  EXPECT_NE(tag("alpha"), kEmptyTag);
}

TEST(Prf, LeafFrequenciesPassChiSquare) {
  const std::uint64_t n = 1024;
  auto fn = MappingFn::from_rng(ChaChaRng(4, "chi"));
  ChaChaRng keys(5);
  std::vector<double> c1(n, 0), c2(n, 0);
  const int N = 1000000;
  for (int i = 0; i < N; ++i) {
    std::uint8_t raw[16];
    keys.fill(raw, sizeof(raw));
    auto [a, b] = fn.leaves(ByteView(raw, sizeof(raw)), n);
    ASSERT_LT(a, n);
    ASSERT_LT(b, n);
    c1[a] += 1;
    c2[b] += 1;
  }
  const double expect = static_cast<double>(N) / n;
  for (const auto* c : {&c1, &c2}) {
    double chi = 0;
    for (double x : *c) chi += (x - expect) * (x - expect) / expect;
    // n - 1 degrees of freedom; 4 standard deviations.
    EXPECT_LT(chi, (n - 1) + 4 * std::sqrt(2.0 * (n - 1)));
  }
}

TEST(Prf, IndependentKeysRarelyCollide) {
  const std::uint64_t n = 16;
  ChaChaRng root(6, "collide");
  const int N = 100000;
  int same = 0;
  for (int i = 0; i < N; ++i) {
    auto f = MappingFn::from_rng(root.derive(2 * i));
    auto g = MappingFn::from_rng(root.derive(2 * i + 1));
    same += f.leaves("fixed-key", n) == g.leaves("fixed-key", n);
  }
  const double p = 1.0 / (n * n);
  EXPECT_NEAR(static_cast<double>(same) / N, p, 4 * std::sqrt(p * (1 - p) / N));
}

TEST(Beta, Examples) {
  const long double e = std::exp(1.0L);
  const double n = 65536;
  EXPECT_NEAR(static_cast<double>(beta(0, n) / (n / (81 * e))), 1.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(beta(1, n) / (4 * n / (6561 * e))), 1.0, 1e-15);
  for (unsigned i = 0; i <= 10; ++i) {
    long double closed = beta(i, n), rec = beta_recurrence(i, n);
    ASSERT_GT(closed, 0.0L) << i;
    EXPECT_LT(std::fabs(static_cast<double>(rec / closed - 1)), 1e-12) << i;
  }
  EXPECT_EQ(i_star(n, 64), 0u);
  EXPECT_EQ(i_star(1e9, 64), 2u);
  EXPECT_FALSE(i_star(1000, 64).has_value());
}

TEST(Simulation, LoadWithinBetaOnceLeavesHoldEnough) {
  // The beta_0 base case needs node capacity well above the default; t = 6 is
  // the smallest that keeps H_0 under beta_0 at this size.
  auto l = layout_for(1 << 16, 6);
  auto rows = simulate(l, 3, 11);
  ASSERT_EQ(rows.size(), 3u);
  const auto star = i_star(static_cast<double>(l.n), static_cast<double>(l.phi));
  ASSERT_TRUE(star.has_value());
  for (const auto& r : rows) {
    EXPECT_FALSE(r.full);
    EXPECT_LE(r.super_root_load, l.phi);
    ASSERT_EQ(r.histogram.size(), l.levels);
    for (unsigned i = 0; i <= *star; ++i) {
      EXPECT_LE(static_cast<long double>(r.histogram[i]), beta(i, static_cast<double>(l.n)));
    }
  }
  EXPECT_EQ(simulate(l, 1, 11)[0].histogram, rows[0].histogram);
}

TEST(Simulation, DefaultCapacityOverflowsLeavesNotRoot) {
  // With t = 4 roughly 4% of leaves fill, above beta_0, yet nothing reaches
  // height 2 and the super root stays empty.
  auto l = layout_for(1 << 16);
  for (const auto& r : simulate(l, 3, 12)) {
    EXPECT_FALSE(r.full);
    EXPECT_GT(static_cast<long double>(r.histogram[0]), beta(0, static_cast<double>(l.n)));
    EXPECT_LE(static_cast<long double>(r.histogram[1]), beta(1, static_cast<double>(l.n)));
    EXPECT_LE(r.max_height_used, 2);
    EXPECT_LE(r.super_root_load, l.phi);
  }
}

TEST(Baseline, TwoChoiceMaxLoad) {
  ChaChaRng rng(9);
  const std::uint64_t n = 1 << 16;
  const double loglog = std::log2(std::log2(static_cast<double>(n)));
  for (int trial = 0; trial < 5; ++trial) {
    EXPECT_LE(static_cast<double>(two_choice_max_load(n, n, rng)), 2 * loglog);
  }
}

}  // namespace
}  // namespace dpstore::mapping
