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
#include <sstream>

#include "dpstore/bench.hpp"
#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/remote.hpp"

namespace dpstore::bench {
namespace {

std::size_t columns(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

TEST(Names, RoundTrip) {
  for (auto s : {Scheme::kDpIr, Scheme::kDpRam, Scheme::kDpKvs}) EXPECT_EQ(parse_scheme(name(s)), s);
  for (auto w : {Workload::kUniform, Workload::kZipf, Workload::kRepeatOne}) {
    EXPECT_EQ(parse_workload(name(w)), w);
  }
  EXPECT_THROW(parse_scheme("oram"), ParameterError);
  EXPECT_THROW(parse_workload("bursty"), ParameterError);
}

TEST(DpRam, ThreeBlocksUnderEveryWorkload) {
  for (auto w : {Workload::kUniform, Workload::kZipf, Workload::kRepeatOne}) {
    BenchConfig c;
    c.scheme = Scheme::kDpRam;
    c.workload = w;
    c.n = 4096;
    c.ops = 5000;
    auto r = run_bench(c);
    ASSERT_FALSE(r.partial) << r.error;
    EXPECT_EQ(r.ops, 5000u);
    EXPECT_EQ(r.blocks_per_op_mean, 3.0);
    EXPECT_EQ(r.blocks_per_op_min, 3u);
    EXPECT_EQ(r.blocks_per_op_max, 3u);
    EXPECT_EQ(r.round_trips_per_op, 3.0);
    EXPECT_TRUE(r.counters_conserved());
    EXPECT_GT(r.stash_max, 0u);
  }
}

TEST(DpIr, BlocksEqualK) {
  BenchConfig c;
  c.scheme = Scheme::kDpIr;
  c.n = 1000000;
  c.ops = 200;
  c.alpha = 0.5;
  // (1 - alpha) n / (alpha (e^eps - 1)) = 8
  c.epsilon = std::log1p(1000000.0 / 8);
  c.block_size = 16;
  auto r = run_bench(c);
  ASSERT_FALSE(r.partial) << r.error;
  EXPECT_EQ(r.k, 8u);
  EXPECT_EQ(r.blocks_per_op_min, 8u);
  EXPECT_EQ(r.blocks_per_op_max, 8u);
  EXPECT_TRUE(r.counters_conserved());
}

TEST(DpKvs, BucketBlocksPerOperation) {
  BenchConfig c;
  c.scheme = Scheme::kDpKvs;
  c.n = 1 << 16;
  c.ops = 400;
  c.block_size = 8;
  auto r = run_bench(c);
  ASSERT_FALSE(r.partial) << r.error;
  EXPECT_EQ(r.levels, 5u);
  EXPECT_EQ(r.blocks_per_get, 120u);
  EXPECT_EQ(r.blocks_per_put, 240u);
  EXPECT_EQ(r.blocks_per_op_min, 120u);
  EXPECT_EQ(r.blocks_per_op_max, 240u);
  EXPECT_TRUE(r.counters_conserved());
  c.uniform_shape = true;
  c.ops = 100;
  auto u = run_bench(c);
  EXPECT_EQ(u.blocks_per_op_min, 240u);
  EXPECT_EQ(u.blocks_per_op_max, 240u);
}

TEST(Determinism, SameSeedSameResult) {
  for (auto s : {Scheme::kDpIr, Scheme::kDpRam, Scheme::kDpKvs}) {
    BenchConfig c;
    c.scheme = s;
    c.n = 512;
    c.ops = 300;
    c.seed = 17;
    auto a = run_bench(c), b = run_bench(c);
    a.wall_time_s = b.wall_time_s = 0;
    EXPECT_EQ(csv_row(a), csv_row(b));
    EXPECT_EQ(a.scheme_touches, b.scheme_touches);
    EXPECT_EQ(a.blocks_per_op_mean, b.blocks_per_op_mean);
  }
}

TEST(Growth, DpRamIsFlat) {
  BenchConfig c;
  c.scheme = Scheme::kDpRam;
  c.ops = 1000;
  c.block_size = 8;
  std::vector<std::uint64_t> grid{1 << 8, 1 << 10, 1 << 12, 1 << 14};
  auto g = growth_curve(c, grid);
  ASSERT_EQ(g.points.size(), 4u);
  EXPECT_LT(std::fabs(g.slope_per_doubling), 0.01);
  EXPECT_NEAR(g.intercept, 3.0, 1e-9);
}

TEST(Csv, HeaderMatchesRows) {
  BenchConfig c;
  c.n = 64;
  c.ops = 10;
  auto r = run_bench(c);
  EXPECT_EQ(columns(csv_header()), columns(csv_row(r)));
  EXPECT_EQ(csv_row(r).substr(0, 14), "dpram,uniform,");
}

TEST(Remote, SameCountsOverTheWire) {
  BenchConfig c;
  c.scheme = Scheme::kDpRam;
  c.n = 256;
  c.ops = 300;
  auto [cells, cell_size] = store_shape(c);
  blockstore::MemoryStore backing(cells, cell_size);
  blockstore::BlockServer server(backing, blockstore::Endpoint{"127.0.0.1", 0});
  server.start();
  c.server = blockstore::Endpoint{"127.0.0.1", server.port()};
  auto remote = run_bench(c);
  server.stop();
  c.server.reset();
  auto local = run_bench(c);
  ASSERT_FALSE(remote.partial) << remote.error;
  EXPECT_EQ(remote.blocks_per_op_mean, local.blocks_per_op_mean);
  EXPECT_EQ(remote.stash_max, local.stash_max);
  EXPECT_TRUE(remote.counters_conserved());
}

TEST(Remote, BackendFailureFlagsPartial) {
  BenchConfig c;
  c.scheme = Scheme::kDpRam;
  c.n = 256;
  c.ops = 100;
  // Server too small for the scheme.
  blockstore::MemoryStore backing(16, store_shape(c).second);
  blockstore::BlockServer server(backing, blockstore::Endpoint{"127.0.0.1", 0});
  server.start();
  c.server = blockstore::Endpoint{"127.0.0.1", server.port()};
  auto r = run_bench(c);
  EXPECT_TRUE(r.partial);
  EXPECT_FALSE(r.error.empty());
}

}  // namespace
}  // namespace dpstore::bench
