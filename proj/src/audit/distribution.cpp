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

#include "dpstore/audit/distribution.hpp"

#include <cmath>
#include <sstream>

namespace dpstore::audit {

std::string to_string(const Transcript& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(t[i]);
  }
  return out;
}

TraceDistribution TraceDistribution::from_counts(std::map<Transcript, std::uint64_t> counts,
                                                 std::uint64_t trials) {
  if (trials == 0) throw ParameterError("no trials");
  TraceDistribution dist;
  dist.exact = false;
  dist.trials = trials;
  for (const auto& [t, c] : counts) {
    if (c) dist.probs.emplace(t, Rational(c, trials));
  }
  dist.counts = std::move(counts);
  return dist;
}

Rational TraceDistribution::prob(const Transcript& t) const {
  auto it = probs.find(t);
  return it == probs.end() ? Rational(0) : it->second;
}

Rational TraceDistribution::total() const {
  Rational sum = 0;
  for (const auto& [t, p] : probs) sum += p;
  return sum;
}

CellComparison compare_cells(const TraceDistribution& estimate, const TraceDistribution& exact,
                             double sigmas) {
  if (estimate.exact || !exact.exact) {
    throw ParameterError("compare_cells needs an estimate and an exact distribution");
  }
  CellComparison cmp;
  const double n = static_cast<double>(estimate.trials);
  double abs_sum = 0.0;
  auto visit = [&](const Transcript& t, double p) {
    auto it = estimate.counts.find(t);
    double freq = it == estimate.counts.end() ? 0.0 : static_cast<double>(it->second) / n;
    double se = std::sqrt(p * (1.0 - p) / n);
    double z = se > 0 ? std::abs(freq - p) / se : (freq == p ? 0.0 : INFINITY);
    ++cmp.cells;
    abs_sum += std::abs(freq - p);
    cmp.worst_sigma = std::max(cmp.worst_sigma, z);
    if (z > sigmas) ++cmp.outside;
  };
  for (const auto& [t, p] : exact.probs) visit(t, to_double(p));
  for (const auto& [t, c] : estimate.counts) {
    if (c && !exact.probs.contains(t)) visit(t, 0.0);
  }
  cmp.mean_abs_error = cmp.cells ? abs_sum / static_cast<double>(cmp.cells) : 0.0;
  return cmp;
}

AdjacentPair AdjacentPair::make(std::vector<BlockId> q, std::vector<BlockId> q2) {
  if (q.size() != q2.size()) throw ParameterError("adjacent sequences differ in length");
  AdjacentPair pair;
  std::size_t diffs = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] != q2[i]) {
      ++diffs;
      pair.k = i + 1;
    }
  }
  if (diffs != 1) {
    throw ParameterError("sequences are at Hamming distance " + std::to_string(diffs) +
                         ", not 1");
  }
  pair.q = std::move(q);
  pair.q2 = std::move(q2);
  return pair;
}

std::optional<std::size_t> pr(std::span<const BlockId> q, std::size_t j) {
  if (j < 1 || j > q.size()) throw ParameterError("position out of range");
  for (std::size_t i = j - 1; i >= 1; --i) {
    if (q[i - 1] == q[j - 1]) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> nx(std::span<const BlockId> q, std::size_t j) {
  if (j < 1 || j > q.size()) throw ParameterError("position out of range");
  for (std::size_t i = j + 1; i <= q.size(); ++i) {
    if (q[i - 1] == q[j - 1]) return i;
  }
  return std::nullopt;
}

std::vector<BlockId> parse_sequence(const std::string& text) {
  std::vector<BlockId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      unsigned long long v = std::stoull(item, &used);
      if (used != item.size() && item.find_first_not_of(' ', used) != std::string::npos) {
        throw std::invalid_argument("trailing");
      }
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParameterError("bad query sequence entry '" + item + "'");
    }
  }
  if (out.empty()) throw ParameterError("empty query sequence");
  return out;
}

}  // namespace dpstore::audit
