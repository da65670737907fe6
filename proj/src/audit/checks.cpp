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

#include "dpstore/audit/checks.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "dpstore/dpir.hpp"

namespace dpstore::audit {

Rational delta_at_ratio(const TraceDistribution& p, const TraceDistribution& q,
                        const Rational& r) {
  Rational sum = 0;
  for (const auto& [t, pt] : p.probs) {
    Rational excess = pt - r * q.prob(t);
    if (excess > 0) sum += excess;
  }
  return sum;
}

namespace {

// Rationals strictly below and above e^epsilon.
std::pair<Rational, Rational> bracket_exp(double epsilon) {
  const double e = std::exp(epsilon);
  double lo = e, hi = e;
  for (int i = 0; i < 4; ++i) {
    lo = std::nextafter(lo, 0.0);
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
  }
  return {rational_from_double(lo), rational_from_double(hi)};
}

double log_rational(const Rational& r) {
  double v = to_double(r);
  if (std::isfinite(v) && v > 0) return std::log(v);
  const BigInt& num = boost::multiprecision::numerator(r);
  const BigInt& den = boost::multiprecision::denominator(r);
  auto lg = [](const BigInt& x) {
    const auto bits = boost::multiprecision::msb(x);
    const auto shift = bits > 60 ? bits - 60 : 0;
    BigInt top = x >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
  };
  return lg(num) - lg(den);
}

}  // namespace

DeltaInterval delta_at(const TraceDistribution& p, const TraceDistribution& q, double epsilon) {
  if (std::isinf(epsilon) && epsilon > 0) return {Rational(0), Rational(0)};
  if (epsilon < 0 || std::isnan(epsilon)) throw ParameterError("epsilon must be >= 0");
  if (epsilon == 0.0) {
    Rational d = delta_at_ratio(p, q, Rational(1));
    return {d, d};
  }
  auto [lo, hi] = bracket_exp(epsilon);
  // delta decreases in the ratio.
  return {delta_at_ratio(p, q, hi), delta_at_ratio(p, q, lo)};
}

DpReport dp_report(const TraceDistribution& p, const TraceDistribution& q,
                   std::span<const double> epsilons) {
  DpReport report;
  std::set<Transcript> support;
  for (const auto& [t, v] : p.probs) support.insert(t);
  for (const auto& [t, v] : q.probs) support.insert(t);
  for (const Transcript& t : support) {
    const Rational a = p.prob(t), b = q.prob(t);
    if (a == 0 && b == 0) continue;
    if (a == 0 || b == 0) {
      report.unbounded = true;
      continue;
    }
    const Rational r = a > b ? a / b : b / a;
    if (r > report.max_ratio) report.max_ratio = r;
  }
  report.epsilon_hat = report.unbounded ? std::numeric_limits<double>::infinity()
                                        : log_rational(report.max_ratio);
  for (double eps : epsilons) {
    report.delta.push_back({eps, delta_at(p, q, eps), delta_at(q, p, eps)});
  }
  return report;
}

namespace {

using PrefixMass = std::vector<std::map<Transcript, Rational>>;

PrefixMass prefix_mass(const TraceDistribution& dist, std::size_t len) {
  PrefixMass mass(len + 1);
  for (const auto& [t, pt] : dist.probs) {
    if (t.size() != len) throw ParameterError("transcripts of unequal length");
    for (std::size_t l = 0; l <= len; ++l) {
      mass[l][Transcript(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(l))] += pt;
    }
  }
  return mass;
}

Rational lookup(const std::map<Transcript, Rational>& m, const Transcript& t) {
  auto it = m.find(t);
  return it == m.end() ? Rational(0) : it->second;
}

}  // namespace

FactorTable factor_table(const dpram::RamParams& params, const TraceDistribution& p,
                         const TraceDistribution& q, const AdjacentPair& pair,
                         bool product_law) {
  if (!p.exact || !q.exact) throw ParameterError("factor table needs exact distributions");
  params.validate();
  const std::size_t l = pair.q.size();
  const Rational prob = params.p();
  const Rational n(params.n);
  FactorTable table;
  table.download_bound = n * n / prob;
  table.overwrite_bound = n / prob;

  const PrefixMass mp = prefix_mass(p, 2 * l);
  const PrefixMass mq = prefix_mass(q, 2 * l);
  const std::span<const BlockId> seqs[2] = {pair.q, pair.q2};
  const PrefixMass* masses[2] = {&mp, &mq};

  std::set<std::size_t> special{pair.k};
  if (auto x = nx(pair.q, pair.k)) special.insert(*x);
  if (auto x = nx(pair.q2, pair.k)) special.insert(*x);

  auto violate = [&](std::string kind, std::size_t j, const Transcript& t, std::string detail) {
    table.violations.push_back({std::move(kind), j, t, std::move(detail)});
  };

  for (std::size_t j = 1; j <= l; ++j) {
    PositionFactors pos;
    pos.position = j;
    pos.special = special.contains(j);

    for (int phase = 0; phase < 2; ++phase) {
      const std::size_t len = 2 * j - 1 + static_cast<std::size_t>(phase);
      const bool download = phase == 0;
      const Rational& bound = download ? table.download_bound : table.overwrite_bound;
      Rational& worst = download ? pos.max_download_ratio : pos.max_overwrite_ratio;

      std::set<Transcript> prefixes;
      for (const auto& [t, v] : mp[len]) prefixes.insert(t);
      for (const auto& [t, v] : mq[len]) prefixes.insert(t);
      for (const Transcript& t : prefixes) {
        ++table.prefixes_checked;
        const Transcript parent(t.begin(), t.end() - 1);
        Rational f[2];
        bool zero = false;
        for (int s = 0; s < 2; ++s) {
          const Rational num = lookup((*masses[s])[len], t);
          const Rational den = lookup((*masses[s])[len - 1], parent);
          if (num == 0 || den == 0) {
            zero = true;
            break;
          }
          f[s] = num / den;
        }
        if (zero) {
          violate("support", j, t, "prefix has mass under only one sequence");
          continue;
        }
        const Rational ratio = f[0] / f[1];
        const Rational sym = ratio >= 1 ? ratio : 1 / ratio;
        if (sym > worst) worst = sym;
        const char* tag = download ? "download" : "overwrite";
        if (!pos.special && ratio != 1) {
          violate(std::string("unit-ratio-") + tag, j, t, "ratio " + dpstore::to_string(ratio));
        }
        if (sym > bound) {
          violate(std::string(tag) + "-bound", j, t,
                  "ratio " + dpstore::to_string(sym) + " exceeds " + dpstore::to_string(bound));
        }
        for (int s = 0; s < 2; ++s) {
          const BlockId qj = seqs[s][j - 1];
          if (download) {
            if (!product_law) continue;
            auto prev = pr(seqs[s], j);
            dpram::PrevCase c = prev ? dpram::PrevCase::after(qj, t[2 * (*prev) - 1])
                                     : dpram::PrevCase::first_access();
            const Rational want = dpram::download_conditional(params, c, qj, t.back());
            if (f[s] != want) {
              violate("download-closed-form", j, t,
                      "got " + dpstore::to_string(f[s]) + ", closed form " + dpstore::to_string(want));
            }
          } else {
            const Rational want = dpram::overwrite_marginal(params, qj, t.back());
            if (f[s] != want) {
              violate("overwrite-conditional", j, t,
                      "got " + dpstore::to_string(f[s]) + ", marginal " + dpstore::to_string(want));
            }
          }
        }
      }
    }

    // Unconditional overwrite marginals.
    for (int s = 0; s < 2; ++s) {
      std::vector<Rational> marginal(params.n + 1, Rational(0));
      for (const auto& [t, v] : (*masses[s])[2 * j]) marginal[t.back()] += v;
      for (BlockId o = 1; o <= params.n; ++o) {
        const Rational want = dpram::overwrite_marginal(params, seqs[s][j - 1], o);
        if (marginal[o] != want) {
          violate("overwrite-marginal", j, Transcript{o},
                  "got " + dpstore::to_string(marginal[o]) + ", closed form " + dpstore::to_string(want));
        }
      }
    }
    table.positions.push_back(std::move(pos));
  }
  return table;
}

MembershipCheck membership_check(std::uint64_t n, const Rational& ratio, const Rational& delta,
                          const std::function<Rational(BlockId, BlockId)>& inclusion) {
  std::vector<std::vector<Rational>> inc(n, std::vector<Rational>(n));
  for (BlockId a = 1; a <= n; ++a) {
    for (BlockId c = 1; c <= n; ++c) inc[a - 1][c - 1] = inclusion(a, c);
  }
  MembershipCheck result;
  for (BlockId a = 1; a <= n; ++a) {
    for (BlockId b = 1; b <= n; ++b) {
      for (BlockId c = 1; c <= n; ++c) {
        ++result.triples;
        const Rational& pa = inc[a - 1][c - 1];
        const Rational& pb = inc[b - 1][c - 1];
        const bool in_ok = pa <= ratio * pb + delta;
        const bool out_ok = 1 - pa <= ratio * (1 - pb) + delta;
        if (in_ok && out_ok) continue;
        ++result.failures;
        if (result.pass) {
          result.first_failure = "a=" + std::to_string(a) + " b=" + std::to_string(b) +
                                 " c=" + std::to_string(c) +
                                 (in_ok ? " (exclusion inequality)" : " (inclusion inequality)");
        }
        result.pass = false;
      }
    }
  }
  return result;
}

std::vector<std::vector<Rational>> ir_inclusion_table(std::uint64_t n, std::uint64_t k,
                                                      const Rational& alpha) {
  if (k < 1 || k > n) throw ParameterError("need 1 <= K <= n");
  if (binomial(n, k) > 1'000'000) throw SizeError("too many transcripts for an inclusion table");
  std::vector<std::vector<Rational>> table(n, std::vector<Rational>(n, Rational(0)));
  dpir::IrTranscript t;
  t.indices.resize(k);
  for (std::uint64_t i = 0; i < k; ++i) t.indices[i] = i + 1;
  while (true) {
    for (BlockId a = 1; a <= n; ++a) {
      const Rational pt = dpir::ir_transcript_prob_exact(n, k, alpha, a, t);
      for (BlockId c : t.indices) table[a - 1][c - 1] += pt;
    }
    // Next k-combination in lexicographic order.
    std::int64_t i = static_cast<std::int64_t>(k) - 1;
    while (i >= 0 && t.indices[i] == n - k + static_cast<std::uint64_t>(i) + 1) --i;
    if (i < 0) break;
    ++t.indices[i];
    for (std::uint64_t m = static_cast<std::uint64_t>(i) + 1; m < k; ++m) {
      t.indices[m] = t.indices[m - 1] + 1;
    }
  }
  return table;
}

MembershipCheck membership_check_ir(std::uint64_t n, std::uint64_t k, const Rational& alpha) {
  const auto table = ir_inclusion_table(n, k, alpha);
  return membership_check(n, dpir::ratio_bound(n, k, alpha), Rational(0),
                      [&](BlockId a, BlockId c) { return table[a - 1][c - 1]; });
}

MembershipCheck membership_check_strawman(std::uint64_t n, const Rational& ratio) {
  return membership_check(n, ratio, Rational(0), [n](BlockId a, BlockId c) {
    return a == c ? Rational(1) : Rational(1, n);
  });
}

}  // namespace dpstore::audit
