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

// Stateless differentially private information retrieval.
//
// A query for block i downloads a set T of exactly K distinct blocks. With
// probability 1 - alpha the set contains i and the block is returned; with
// probability alpha the set is K uniform blocks and the query misses. The
// server sees T only, and a transcript is at most
// 1 + (1 - alpha) n / (alpha K) times likelier under one query than another.

#ifndef DPSTORE_DPIR_HPP_
#define DPSTORE_DPIR_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/common.hpp"
#include "dpstore/random.hpp"
#include "dpstore/rational.hpp"

namespace dpstore::dpir {

struct DpIrParams {
  std::uint64_t n = 0;
  double alpha = 0.5;
  // Requested budget; informational once k is fixed.
  double epsilon = 0.0;
  std::uint64_t k = 0;
  // Full-download mode only (k == n): answer from the downloaded set in the
  // alpha branch too. Off by default so misses happen with probability alpha
  // at every K.
  bool answer_on_full_download = false;

  // K from compute_k(n, alpha, epsilon).
  static DpIrParams for_budget(std::uint64_t n, double alpha, double epsilon);
  static DpIrParams with_k(std::uint64_t n, double alpha, std::uint64_t k);

  void validate() const;
};

// K = clamp(ceil((1 - alpha) n / (alpha (e^epsilon - 1))), 1, n). This is the
// K for which the achieved budget does not exceed epsilon.
std::uint64_t compute_k(std::uint64_t n, double alpha, double epsilon);

// Variant without alpha in the denominator: ceil((1 - alpha) n / (e^eps - 1)).
// Exposed for comparison; its achieved budget can exceed epsilon.
std::uint64_t compute_k_unscaled(std::uint64_t n, double alpha, double epsilon);

// ln(1 + (1 - alpha) n / (alpha K)); exactly 0 when K == n, since then every
// query downloads [n].
double achieved_epsilon(const DpIrParams& params);

// e^epsilon of the per-transcript bound, exactly: 1 + (1 - alpha) n / (alpha K).
Rational ratio_bound(std::uint64_t n, std::uint64_t k, const Rational& alpha);

// Sorted ascending; the set, not the sampling order, is what the server sees.
struct IrTranscript {
  std::vector<BlockId> indices;

  friend bool operator==(const IrTranscript&, const IrTranscript&) = default;
};

struct IrResult {
  IrTranscript transcript;
  // nullopt is the miss (error) outcome.
  std::optional<Bytes> block;

  bool hit() const { return block.has_value(); }
};

// Draws the download set for a query of `target`. `include_target` reports
// whether the non-error branch was taken.
IrTranscript sample_transcript(const DpIrParams& params, BlockId target, ChaChaRng& rng,
                               bool* include_target = nullptr);

// Samples a transcript, downloads it, and decrypts the target on a hit. The
// store is read only.
IrResult ir_query(const DpIrParams& params, BlockId target, blockstore::BlockStore& store,
                  const blockstore::Cipher& cipher, ChaChaRng& rng);

// Exact probability that a query for `queried` emits transcript `t`:
//   queried in t:     (1 - alpha) / C(n-1, K-1) + alpha / C(n, K)
//   queried not in t: alpha / C(n, K)
// Throws ParameterError if t is not K distinct members of [n].
Rational ir_transcript_prob_exact(std::uint64_t n, std::uint64_t k, const Rational& alpha,
                                  BlockId queried, const IrTranscript& t);

// Same quantity in long double via a product of binomial ratios; relative error
// below 1e-12 for n up to 10^7.
double ir_transcript_prob(const DpIrParams& params, BlockId queried, const IrTranscript& t);

void validate_transcript(std::uint64_t n, std::uint64_t k, const IrTranscript& t);

}  // namespace dpstore::dpir

#endif  // DPSTORE_DPIR_HPP_
