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

#ifndef DPSTORE_AUDIT_DISTRIBUTION_HPP_
#define DPSTORE_AUDIT_DISTRIBUTION_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpstore/common.hpp"
#include "dpstore/rational.hpp"

namespace dpstore::audit {

// Flattened adversary view. DP-RAM: d1, o1, d2, o2, ...; DP-IR: the sorted
// download set; strawman classes use their own small encoding.
using Transcript = std::vector<std::uint64_t>;

std::string to_string(const Transcript& t);

struct TraceDistribution {
  bool exact = true;
  // Estimated distributions: number of runs and raw counts per transcript.
  std::uint64_t trials = 0;
  std::map<Transcript, std::uint64_t> counts;
  // Exact probability, or count / trials when estimated. Zero-mass
  // transcripts are absent.
  std::map<Transcript, Rational> probs;

  static TraceDistribution from_counts(std::map<Transcript, std::uint64_t> counts,
                                       std::uint64_t trials);

  Rational prob(const Transcript& t) const;
  Rational total() const;
};

// Per-cell comparison of an estimate against exact probabilities using the
// binomial standard error sqrt(p (1 - p) / trials).
struct CellComparison {
  std::uint64_t cells = 0;
  std::uint64_t outside = 0;  // cells farther than `sigmas` standard errors
  double worst_sigma = 0.0;
  double mean_abs_error = 0.0;
};

CellComparison compare_cells(const TraceDistribution& estimate, const TraceDistribution& exact,
                             double sigmas = 4.0);

// Q and Q' of equal length differing at exactly one position k (1-based).
struct AdjacentPair {
  std::vector<BlockId> q;
  std::vector<BlockId> q2;
  std::size_t k = 0;

  // Throws ParameterError unless the Hamming distance is exactly 1.
  static AdjacentPair make(std::vector<BlockId> q, std::vector<BlockId> q2);
};

// 1-based positions; nullopt stands for +/- infinity.
std::optional<std::size_t> pr(std::span<const BlockId> q, std::size_t j);
std::optional<std::size_t> nx(std::span<const BlockId> q, std::size_t j);

std::vector<BlockId> parse_sequence(const std::string& text);

}  // namespace dpstore::audit

#endif  // DPSTORE_AUDIT_DISTRIBUTION_HPP_
