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

// Monte Carlo transcript distributions. Trials are split into a fixed number
// of chunks, each with its own stream derived from the seed, so the result
// does not depend on the thread count.

#ifndef DPSTORE_AUDIT_EMPIRICAL_HPP_
#define DPSTORE_AUDIT_EMPIRICAL_HPP_

#include <cstdint>
#include <span>

#include "dpstore/audit/distribution.hpp"
#include "dpstore/dpir.hpp"
#include "dpstore/dpram.hpp"

namespace dpstore::audit {

struct EmpiricalConfig {
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  // Allow fewer than 10^4 trials (unit tests of the plumbing only).
  bool allow_small = false;
};

inline constexpr unsigned kChunks = 64;

// Runs setup + Q on a fresh in-memory store per trial with the transparent
// cipher.
TraceDistribution empirical_ram(const dpram::RamParams& params, std::span<const BlockId> q,
                                const dpram::InitialStash& law, const EmpiricalConfig& config);
TraceDistribution empirical_ir(const dpir::DpIrParams& params, BlockId queried,
                               const EmpiricalConfig& config);
TraceDistribution empirical_strawman(std::uint64_t n, BlockId queried,
                                     const EmpiricalConfig& config);

}  // namespace dpstore::audit

#endif  // DPSTORE_AUDIT_EMPIRICAL_HPP_
