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

// Server-side overhead measurement. Every count comes from the block store's
// own counters.

#ifndef DPSTORE_BENCH_HPP_
#define DPSTORE_BENCH_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpstore/blockstore/remote.hpp"

namespace dpstore::bench {

enum class Scheme { kDpIr, kDpRam, kDpKvs };
enum class Workload { kUniform, kZipf, kRepeatOne };

Scheme parse_scheme(const std::string& name);
Workload parse_workload(const std::string& name);
std::string name(Scheme scheme);
std::string name(Workload workload);

struct BenchConfig {
  Scheme scheme = Scheme::kDpRam;
  Workload workload = Workload::kUniform;
  std::uint64_t n = 1024;
  std::uint64_t ops = 1000;
  std::uint64_t seed = 1;
  std::size_t block_size = 64;
  // Remote backend; the server must be sized for the scheme's cells.
  std::optional<blockstore::Endpoint> server;
  double zipf_exponent = 1.1;
  // dpir: K from (alpha, epsilon) when epsilon > 0, else k.
  double alpha = 0.5;
  double epsilon = 0.0;
  std::uint64_t k = 8;
  // dpram: stash threshold C; 0 picks the default.
  std::uint64_t threshold = 0;
  // dpkvs
  bool uniform_shape = false;
};

struct BenchResult {
  std::string scheme;
  std::string workload;
  std::uint64_t n = 0;
  std::uint64_t ops = 0;  // completed
  double blocks_per_op_mean = 0.0;
  std::uint64_t blocks_per_op_min = 0;
  std::uint64_t blocks_per_op_max = 0;
  double round_trips_per_op = 0.0;
  std::uint64_t stash_max = 0;
  std::uint64_t super_root_max = 0;
  double wall_time_s = 0.0;
  // Cross-check: touches the scheme reports vs the store counted.
  std::uint64_t scheme_touches = 0;
  std::uint64_t store_touches = 0;
  // Scheme shape.
  std::uint64_t k = 0;
  std::uint32_t levels = 0;
  std::uint64_t blocks_per_get = 0;  // max observed
  std::uint64_t blocks_per_put = 0;
  bool partial = false;
  std::string error;

  bool counters_conserved() const { return scheme_touches == store_touches; }
};

// Cells and cell size a server needs for `config`.
std::pair<std::uint64_t, std::size_t> store_shape(const BenchConfig& config);

BenchResult run_bench(const BenchConfig& config);

struct GrowthCurve {
  std::vector<BenchResult> points;
  // Least squares of blocks/op against log2 n.
  double slope_per_doubling = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  // dpkvs only: least squares against levels.
  double slope_per_level = 0.0;
};

GrowthCurve growth_curve(const BenchConfig& base, std::span<const std::uint64_t> grid);

std::string csv_header();
std::string csv_row(const BenchResult& r);

}  // namespace dpstore::bench

#endif  // DPSTORE_BENCH_HPP_
