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

#include "dpstore/dpir.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

namespace dpstore::dpir {

namespace {

std::uint64_t clamp_ceil(double x, std::uint64_t n) {
  if (std::isnan(x)) throw ParameterError("K is undefined for these parameters");
  if (x >= static_cast<double>(n)) return n;
  // Absorb the rounding of e^epsilon so an exact integer quotient is not
  // bumped to the next integer.
  double k = std::ceil(x * (1.0 - 1e-12));
  return std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::max(k, 1.0)), 1, n);
}

void check_budget_inputs(std::uint64_t n, double alpha, double epsilon) {
  if (n == 0) throw ParameterError("n must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (!(epsilon > 0.0)) {
    throw ParameterError("epsilon must be positive: no partial download is 0-DP");
  }
}

}  // namespace

std::uint64_t compute_k(std::uint64_t n, double alpha, double epsilon) {
  check_budget_inputs(n, alpha, epsilon);
  double x = (1.0 - alpha) * static_cast<double>(n) / (alpha * std::expm1(epsilon));
  return clamp_ceil(x, n);
}

std::uint64_t compute_k_unscaled(std::uint64_t n, double alpha, double epsilon) {
  check_budget_inputs(n, alpha, epsilon);
  double x = (1.0 - alpha) * static_cast<double>(n) / std::expm1(epsilon);
  return clamp_ceil(x, n);
}

DpIrParams DpIrParams::for_budget(std::uint64_t n, double alpha, double epsilon) {
  DpIrParams p;
  p.n = n;
  p.alpha = alpha;
  p.epsilon = epsilon;
  p.k = compute_k(n, alpha, epsilon);
  return p;
}

DpIrParams DpIrParams::with_k(std::uint64_t n, double alpha, std::uint64_t k) {
  DpIrParams p;
  p.n = n;
  p.alpha = alpha;
  p.k = k;
  p.validate();
  p.epsilon = achieved_epsilon(p);
  return p;
}

void DpIrParams::validate() const {
  if (n == 0) throw ParameterError("n must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (k < 1 || k > n) throw ParameterError("K must lie in [1, n]");
}

double achieved_epsilon(const DpIrParams& params) {
  params.validate();
  if (params.k == params.n) return 0.0;
  return std::log1p((1.0 - params.alpha) * static_cast<double>(params.n) /
                    (params.alpha * static_cast<double>(params.k)));
}

Rational ratio_bound(std::uint64_t n, std::uint64_t k, const Rational& alpha) {
  return Rational(1) + (Rational(1) - alpha) * Rational(n) / (alpha * Rational(k));
}

IrTranscript sample_transcript(const DpIrParams& params, BlockId target, ChaChaRng& rng,
                               bool* include_target) {
  params.validate();
  if (target < 1 || target > params.n) throw ParameterError("query index outside [1, n]");
  const bool include = rng.unit() >= params.alpha;
  if (include_target) *include_target = include;

  std::vector<BlockId> chosen;
  chosen.reserve(params.k);
  if (include) chosen.push_back(target);

  if (params.k <= params.n / 2) {
    std::unordered_set<BlockId> seen(chosen.begin(), chosen.end());
    while (chosen.size() < params.k) {
      BlockId j = rng.index(params.n);
      if (seen.insert(j).second) chosen.push_back(j);
    }
  } else {
    // Partial Fisher-Yates over [n] minus what is already chosen.
    std::vector<BlockId> pool;
    pool.reserve(params.n);
    for (BlockId j = 1; j <= params.n; ++j) {
      if (!(include && j == target)) pool.push_back(j);
    }
    std::size_t need = params.k - chosen.size();
    for (std::size_t s = 0; s < need; ++s) {
      std::size_t pick = s + rng.below(pool.size() - s);
      std::swap(pool[s], pool[pick]);
      chosen.push_back(pool[s]);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return IrTranscript{std::move(chosen)};
}

IrResult ir_query(const DpIrParams& params, BlockId target, blockstore::BlockStore& store,
                  const blockstore::Cipher& cipher, ChaChaRng& rng) {
  if (store.cells() < params.n) throw ParameterError("store holds fewer than n cells");
  bool include = false;
  IrResult result;
  result.transcript = sample_transcript(params, target, rng, &include);
  const bool answer = include || (params.answer_on_full_download && params.k == params.n);
  for (BlockId j : result.transcript.indices) {
    Bytes ct = store.download(j);
    if (answer && j == target) result.block = cipher.decrypt(ct);
  }
  return result;
}

void validate_transcript(std::uint64_t n, std::uint64_t k, const IrTranscript& t) {
  if (t.indices.size() != k) {
    throw ParameterError("transcript has " + std::to_string(t.indices.size()) +
                         " members, expected K = " + std::to_string(k));
  }
  std::vector<BlockId> sorted = t.indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ParameterError("transcript repeats an index");
  }
  if (!sorted.empty() && (sorted.front() < 1 || sorted.back() > n)) {
    throw ParameterError("transcript index outside [1, n]");
  }
}

Rational ir_transcript_prob_exact(std::uint64_t n, std::uint64_t k, const Rational& alpha,
                                  BlockId queried, const IrTranscript& t) {
  if (k < 1 || k > n) throw ParameterError("K must lie in [1, n]");
  validate_transcript(n, k, t);
  const bool member =
      std::find(t.indices.begin(), t.indices.end(), queried) != t.indices.end();
  Rational miss = alpha / Rational(binomial(n, k));
  if (!member) return miss;
  return (Rational(1) - alpha) / Rational(binomial(n - 1, k - 1)) + miss;
}

double ir_transcript_prob(const DpIrParams& params, BlockId queried, const IrTranscript& t) {
  params.validate();
  validate_transcript(params.n, params.k, t);
  const auto n = static_cast<long double>(params.n);
  const auto k = static_cast<long double>(params.k);
  // 1 / C(n, K) as a product of min(K, n - K) ratios; relative error grows
  // with the term count, about 1e-19 per term.
  const std::uint64_t m = std::min(params.k, params.n - params.k);
  long double inv_choose = 1.0L;
  for (std::uint64_t i = 0; i < m; ++i) {
    inv_choose *= static_cast<long double>(m - i) / static_cast<long double>(params.n - i);
  }
  const long double alpha = params.alpha;
  const bool member =
      std::find(t.indices.begin(), t.indices.end(), queried) != t.indices.end();
  if (!member) return static_cast<double>(alpha * inv_choose);
  // 1 / C(n-1, K-1) = (n / K) / C(n, K)
  return static_cast<double>(((1 - alpha) * n / k + alpha) * inv_choose);
}

}  // namespace dpstore::dpir
