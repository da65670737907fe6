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

#include "dpstore/audit/oracle.hpp"

#include <algorithm>
#include <functional>

#include "dpstore/dpir.hpp"

namespace dpstore::audit {

namespace {

using Weight = unsigned __int128;

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t limit) {
  std::uint64_t v = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (v > limit / base) return limit + 1;
    v *= base;
  }
  return v;
}

}  // namespace

TraceDistribution enumerate_ram(const dpram::RamParams& params, std::span<const BlockId> q,
                                const dpram::InitialStash& law) {
  params.validate();
  const std::uint64_t n = params.n;
  const std::uint64_t l = q.size();
  if (n > 6 || l > 5) throw SizeError("exact enumeration needs n <= 6 and |Q| <= 5");
  if (l == 0) throw ParameterError("empty query sequence");
  for (BlockId x : q) {
    if (x < 1 || x > n) throw ParameterError("query index outside [1, n]");
  }
  const std::uint64_t masks = std::uint64_t{1} << n;
  const std::uint64_t codes = checked_pow(n * n, l, kMaxRamStates);
  if (codes > kMaxRamStates || codes * masks > kMaxRamStates) {
    throw SizeError("state space n^(2l) * 2^n exceeds " + std::to_string(kMaxRamStates));
  }
  const std::uint64_t num = params.stash_num;
  const std::uint64_t den = params.stash_den;

  // Weights share the denominator den^n (n * den * n)^l.
  BigInt denom = power(BigInt(den), static_cast<unsigned>(n)) *
                 power(BigInt(n * den * n), static_cast<unsigned>(l));
  if (denom >= (BigInt(1) << 126)) throw SizeError("weights do not fit in 128 bits");

  std::vector<Weight> layer(masks, 0);
  if (law.bernoulli) {
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
      Weight w = 1;
      for (std::uint64_t b = 0; b < n; ++b) w *= (mask >> b & 1) ? num : den - num;
      layer[mask] = w;
    }
  } else {
    std::uint64_t mask = 0;
    for (BlockId m : law.members) {
      if (m < 1 || m > n) throw ParameterError("initial stash member outside [1, n]");
      mask |= std::uint64_t{1} << (m - 1);
    }
    Weight w = 1;
    for (std::uint64_t b = 0; b < n; ++b) w *= den;
    layer[mask] = w;
  }

  std::uint64_t prefix_codes = 1;
  std::vector<Weight> final_weights;
  for (std::uint64_t j = 0; j < l; ++j) {
    const std::uint64_t qi = q[j] - 1;
    const std::uint64_t qb = std::uint64_t{1} << qi;
    const bool last = j + 1 == l;
    std::vector<Weight> next(last ? prefix_codes * n * n : prefix_codes * n * n * masks, 0);
    for (std::uint64_t code = 0; code < prefix_codes; ++code) {
      for (std::uint64_t mask = 0; mask < masks; ++mask) {
        const Weight w = layer[code * masks + mask];
        if (!w) continue;
        const bool hit = mask & qb;
        const std::uint64_t after_download = mask & ~qb;
        for (std::uint64_t d = 0; d < n; ++d) {
          Weight dw;
          if (hit) {
            dw = 1;
          } else if (d == qi) {
            dw = n;
          } else {
            continue;
          }
          for (std::uint64_t o = 0; o < n; ++o) {
            // Stash branch: o uniform; otherwise o = q.
            const Weight stash_w = num;
            const Weight keep_w = o == qi ? Weight{den - num} * n : 0;
            const std::uint64_t out = (code * n + d) * n + o;
            if (stash_w) {
              const Weight v = w * dw * stash_w;
              if (last) {
                next[out] += v;
              } else {
                next[out * masks + (after_download | qb)] += v;
              }
            }
            if (keep_w) {
              const Weight v = w * dw * keep_w;
              if (last) {
                next[out] += v;
              } else {
                next[out * masks + after_download] += v;
              }
            }
          }
        }
      }
    }
    prefix_codes *= n * n;
    if (last) {
      final_weights = std::move(next);
    } else {
      layer = std::move(next);
    }
  }

  TraceDistribution dist;
  dist.exact = true;
  for (std::uint64_t code = 0; code < final_weights.size(); ++code) {
    const Weight w = final_weights[code];
    if (!w) continue;
    Transcript t(2 * l);
    std::uint64_t c = code;
    for (std::uint64_t i = 2 * l; i-- > 0;) {
      t[i] = c % n + 1;
      c /= n;
    }
    BigInt big = static_cast<std::uint64_t>(w >> 64);
    big <<= 64;
    big += static_cast<std::uint64_t>(w);
    dist.probs.emplace(std::move(t), Rational(big, denom));
  }
  return dist;
}

TraceDistribution enumerate_ir(std::uint64_t n, std::uint64_t k, const Rational& alpha,
                               BlockId queried) {
  if (n == 0 || k < 1 || k > n) throw ParameterError("need 1 <= K <= n");
  if (alpha <= 0 || alpha >= 1) throw ParameterError("alpha must lie in (0, 1)");
  if (queried < 1 || queried > n) throw ParameterError("queried index outside [1, n]");
  std::uint64_t sequences = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    sequences *= n - i;
    if (sequences > 10'000'000) throw SizeError("too many draw sequences to enumerate");
  }

  TraceDistribution dist;
  std::vector<BlockId> chosen;
  std::vector<bool> used(n + 1, false);
  // Draw `remaining` more blocks, each uniform over the unchosen ones.
  std::function<void(std::uint64_t, const Rational&)> walk = [&](std::uint64_t remaining,
                                                                 const Rational& w) {
    if (remaining == 0) {
      Transcript t(chosen.begin(), chosen.end());
      std::sort(t.begin(), t.end());
      dist.probs[t] += w;
      return;
    }
    const Rational step = w / Rational(n - chosen.size());
    for (BlockId j = 1; j <= n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      chosen.push_back(j);
      walk(remaining - 1, step);
      chosen.pop_back();
      used[j] = false;
    }
  };
  // Answer branch: the target first, then K - 1 fills.
  used[queried] = true;
  chosen.push_back(queried);
  walk(k - 1, Rational(1) - alpha);
  chosen.clear();
  used.assign(n + 1, false);
  // Error branch: K fills.
  walk(k, alpha);
  return dist;
}

std::vector<BlockId> strawman_query(std::uint64_t n, BlockId target, ChaChaRng& rng) {
  if (target < 1 || target > n) throw ParameterError("target outside [1, n]");
  std::vector<BlockId> out;
  for (BlockId j = 1; j <= n; ++j) {
    if (j == target || rng.below(n) == 0) out.push_back(j);
  }
  return out;
}

TraceDistribution strawman_exact(std::uint64_t n, BlockId queried) {
  if (n < 1 || n > 16) throw SizeError("subset enumeration needs n <= 16");
  if (queried < 1 || queried > n) throw ParameterError("queried index outside [1, n]");
  TraceDistribution dist;
  const Rational in(1, n), out(n - 1, n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (!(mask >> (queried - 1) & 1)) continue;
    Rational p = 1;
    Transcript t;
    for (BlockId j = 1; j <= n; ++j) {
      const bool member = mask >> (j - 1) & 1;
      if (member) t.push_back(j);
      if (j != queried) p *= member ? in : out;
    }
    dist.probs.emplace(std::move(t), p);
  }
  return dist;
}

TraceDistribution strawman_classes(std::uint64_t n, BlockId i, BlockId j, BlockId queried) {
  if (n < 2 || i < 1 || i > n || j < 1 || j > n || i == j) {
    throw ParameterError("need distinct i, j in [n], n >= 2");
  }
  if (queried != i && queried != j) throw ParameterError("queried must be i or j");
  TraceDistribution dist;
  const Rational in(1, n), out(n - 1, n);
  for (std::uint64_t m = 0; m + 2 <= n; ++m) {
    const auto mu = static_cast<unsigned>(m);
    const auto rest_out = static_cast<unsigned>(n - 2 - m);
    const Rational rest = Rational(binomial(n - 2, m)) *
                          Rational(power(BigInt(n - 1), rest_out), power(BigInt(n), mu + rest_out));
    for (int other_in = 0; other_in <= 1; ++other_in) {
      Rational p = rest * (other_in ? in : out);
      const std::uint64_t has_i = queried == i ? 1 : other_in;
      const std::uint64_t has_j = queried == j ? 1 : other_in;
      dist.probs.emplace(Transcript{has_i, has_j, m}, p);
    }
  }
  return dist;
}

}  // namespace dpstore::audit
