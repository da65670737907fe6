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

// Privacy checks over transcript distributions.

#ifndef DPSTORE_AUDIT_CHECKS_HPP_
#define DPSTORE_AUDIT_CHECKS_HPP_

#include <cstdint>
#include <algorithm>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dpstore/audit/distribution.hpp"
#include "dpstore/dpram.hpp"
#include "dpstore/rational.hpp"

namespace dpstore::audit {

// Encloses an exact delta whose e^epsilon is irrational.
struct DeltaInterval {
  Rational lo;
  Rational hi;

  double value() const { return to_double((lo + hi) / 2); }
};

// sum_T max(0, P(T) - r Q(T)), exact.
Rational delta_at_ratio(const TraceDistribution& p, const TraceDistribution& q,
                        const Rational& r);
// Same at r = e^epsilon, bracketed by rationals on either side of exp().
DeltaInterval delta_at(const TraceDistribution& p, const TraceDistribution& q, double epsilon);

struct DeltaPoint {
  double epsilon = 0.0;
  DeltaInterval forward;   // P against Q
  DeltaInterval backward;  // Q against P
  double value() const { return std::max(forward.value(), backward.value()); }
};

struct DpReport {
  // max over transcripts of max(P/Q, Q/P); unset when some transcript has
  // mass under exactly one of the two.
  bool unbounded = false;
  Rational max_ratio{1};
  double epsilon_hat = 0.0;  // +inf when unbounded
  std::vector<DeltaPoint> delta;
};

DpReport dp_report(const TraceDistribution& p, const TraceDistribution& q,
                   std::span<const double> epsilons);

struct FactorViolation {
  std::string kind;
  std::size_t position = 0;
  Transcript prefix;
  std::string detail;
};

struct PositionFactors {
  std::size_t position = 0;  // 1-based
  bool special = false;      // in {k, nx(Q,k), nx(Q',k)}
  Rational max_download_ratio{1};
  Rational max_overwrite_ratio{1};
};

struct FactorTable {
  Rational download_bound;   // n^2 / p
  Rational overwrite_bound;  // n / p
  std::vector<PositionFactors> positions;
  std::vector<FactorViolation> violations;
  std::uint64_t prefixes_checked = 0;

  bool ok() const { return violations.empty(); }
};

// Conditional download and overwrite factors of Q against Q' at every
// position and prefix. Checks: ratio exactly 1 off {k, nx(Q,k), nx(Q',k)};
// download ratio <= n^2/p; overwrite ratio <= n/p; overwrite marginals and
// conditionals equal the closed form; download conditionals equal the
// closed form (product initial law only). Throws ParameterError for
// estimated inputs.
FactorTable factor_table(const dpram::RamParams& params, const TraceDistribution& p,
                         const TraceDistribution& q, const AdjacentPair& pair,
                         bool product_law = true);

// Both inequalities
//   Pr[c in IR(a)]     <= r Pr[c in IR(b)]     + delta
//   Pr[c not in IR(a)] <= r Pr[c not in IR(b)] + delta
// over all triples in [n]^3. `inclusion(a, c)` is Pr[c in IR(a)].
struct MembershipCheck {
  bool pass = true;
  std::uint64_t triples = 0;
  std::uint64_t failures = 0;
  std::string first_failure;
};

MembershipCheck membership_check(std::uint64_t n, const Rational& ratio, const Rational& delta,
                          const std::function<Rational(BlockId, BlockId)>& inclusion);

// Exact inclusion probabilities of the retrieval scheme, from its transcript
// probabilities; n x n table indexed [a-1][c-1].
std::vector<std::vector<Rational>> ir_inclusion_table(std::uint64_t n, std::uint64_t k,
                                                      const Rational& alpha);

// The retrieval scheme at its own ratio bound, delta = 0.
MembershipCheck membership_check_ir(std::uint64_t n, std::uint64_t k, const Rational& alpha);
MembershipCheck membership_check_strawman(std::uint64_t n, const Rational& ratio);

// Measured reference point: n = 3, p = 1/2, Q = (1,2,1) against (1,3,1).
// The worst transcript ratio is exactly 16, so epsilon_hat = ln 16.
inline constexpr std::uint64_t kReferenceRamMaxRatio = 16;
inline constexpr double kReferenceRamEpsilonHat = 2.7725887222397811;

}  // namespace dpstore::audit

#endif  // DPSTORE_AUDIT_CHECKS_HPP_
