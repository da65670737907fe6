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

// Exact transcript distributions for small instances.

#ifndef DPSTORE_AUDIT_ORACLE_HPP_
#define DPSTORE_AUDIT_ORACLE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "dpstore/audit/distribution.hpp"
#include "dpstore/dpram.hpp"
#include "dpstore/random.hpp"
#include "dpstore/rational.hpp"

namespace dpstore::audit {

// Largest final state count (n^(2l) * 2^n) enumerate_ram accepts.
inline constexpr std::uint64_t kMaxRamStates = 10'000'000;

// Forward dynamic program over (stash membership, transcript prefix). Only
// indices matter; operation types do not change the view. Throws SizeError
// when n > 6, |Q| > 5 or the state count exceeds kMaxRamStates.
TraceDistribution enumerate_ram(const dpram::RamParams& params, std::span<const BlockId> q,
                                const dpram::InitialStash& law = dpram::InitialStash::product());

// Walks every ordered draw sequence of the retrieval sampler and sums the
// sequences into sets. Throws SizeError beyond 10^7 sequences.
TraceDistribution enumerate_ir(std::uint64_t n, std::uint64_t k, const Rational& alpha,
                               BlockId queried);

// Insecure baseline: always fetch the target, each other block w.p. 1/n.
std::vector<BlockId> strawman_query(std::uint64_t n, BlockId target, ChaChaRng& rng);

// Every subset, for small n (<= 16).
TraceDistribution strawman_exact(std::uint64_t n, BlockId queried);

// Distribution over classes (i in T, j in T, |T \ {i, j}|) for a query of
// `queried` in {i, j}. Both probabilities are constant inside a class, so
// ratios and sums of positive parts computed on classes equal those over
// sets. Transcript encoding: {i in T, j in T, m}.
TraceDistribution strawman_classes(std::uint64_t n, BlockId i, BlockId j, BlockId queried);

}  // namespace dpstore::audit

#endif  // DPSTORE_AUDIT_ORACLE_HPP_
