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

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "dpstore/audit/empirical.hpp"
#include "dpstore/audit/oracle.hpp"
#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/dpir.hpp"

namespace dpstore::dpir {
namespace {

std::vector<IrTranscript> all_subsets(std::uint64_t n, std::uint64_t k) {
  std::vector<IrTranscript> out;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    if (static_cast<std::uint64_t>(__builtin_popcountll(mask)) != k) continue;
    IrTranscript t;
    for (std::uint64_t j = 0; j < n; ++j) {
      if (mask >> j & 1) t.indices.push_back(j + 1);
    }
    out.push_back(t);
  }
  return out;
}

TEST(ComputeK, Examples) {
  EXPECT_EQ(compute_k(100, 0.5, std::log(101.0)), 1u);
  EXPECT_EQ(compute_k(16, 0.25, std::log(5.0)), 12u);
  EXPECT_EQ(compute_k(8, 0.5, 0.01), 8u);
  EXPECT_THROW(compute_k(8, 0.5, 0.0), ParameterError);
  EXPECT_THROW(compute_k(8, 0.0, 1.0), ParameterError);
  EXPECT_THROW(compute_k(8, 1.0, 1.0), ParameterError);
}

TEST(ComputeK, AchievedBudgetNeverExceedsRequest) {
  for (std::uint64_t n : {10u, 100u, 1000u, 12345u}) {
    for (double alpha : {0.1, 0.25, 0.5, 0.9}) {
      for (double eps : {0.05, 0.5, 1.0, 2.0, 5.0}) {
        auto p = DpIrParams::for_budget(n, alpha, eps);
        if (p.k < n) EXPECT_LE(achieved_epsilon(p), eps * (1 + 1e-9)) << n << ' ' << alpha;
        if (p.k > 1 && p.k < n) {
          // K - 1 would overshoot.
          auto q = DpIrParams::with_k(n, alpha, p.k - 1);
          EXPECT_GT(achieved_epsilon(q), eps * (1 - 1e-9));
        }
      }
    }
  }
}

TEST(ComputeK, UnscaledVariantOmitsAlpha) {
  EXPECT_EQ(compute_k_unscaled(16, 0.25, std::log(5.0)), 3u);
  auto p = DpIrParams::with_k(16, 0.25, compute_k_unscaled(16, 0.25, std::log(5.0)));
  EXPECT_GT(achieved_epsilon(p), std::log(5.0));
}

TEST(AchievedEpsilon, Examples) {
  EXPECT_NEAR(achieved_epsilon(DpIrParams::with_k(100, 0.5, 1)), std::log(101.0), 1e-12);
  EXPECT_EQ(achieved_epsilon(DpIrParams::with_k(8, 0.5, 8)), 0.0);
  EXPECT_LT(achieved_epsilon(DpIrParams::with_k(100, 0.999999, 1)), 1e-3);
  EXPECT_EQ(ratio_bound(6, 3, Rational(1, 2)), Rational(3));
}

TEST(TranscriptProb, Examples) {
  IrTranscript in{{1, 2}}, out{{2, 3}};
  EXPECT_EQ(ir_transcript_prob_exact(4, 2, Rational(1, 2), 1, in), Rational(1, 4));
  EXPECT_EQ(ir_transcript_prob_exact(4, 2, Rational(1, 2), 1, out), Rational(1, 12));
  auto p = DpIrParams::with_k(4, 0.5, 2);
  EXPECT_NEAR(ir_transcript_prob(p, 1, in), 0.25, 1e-15);
  EXPECT_NEAR(ir_transcript_prob(p, 1, out), 0.5 / 6, 1e-15);
}

TEST(TranscriptProb, MalformedRejected) {
  EXPECT_THROW(ir_transcript_prob_exact(4, 2, Rational(1, 2), 1, IrTranscript{{1}}),
               ParameterError);
  EXPECT_THROW(ir_transcript_prob_exact(4, 2, Rational(1, 2), 1, IrTranscript{{1, 1}}),
               ParameterError);
  EXPECT_THROW(ir_transcript_prob_exact(4, 2, Rational(1, 2), 1, IrTranscript{{1, 5}}),
               ParameterError);
}

TEST(TranscriptProb, NormalizesAndMatchesSamplingTree) {
  for (std::uint64_t n = 1; n <= 7; ++n) {
    for (std::uint64_t k = 1; k <= n; ++k) {
      for (const Rational alpha : {Rational(1, 2), Rational(1, 3), Rational(9, 10)}) {
        auto tree = audit::enumerate_ir(n, k, alpha, 1);
        Rational sum = 0;
        for (const auto& t : all_subsets(n, k)) {
          Rational p = ir_transcript_prob_exact(n, k, alpha, 1, t);
          sum += p;
          ASSERT_EQ(tree.prob(t.indices), p) << n << ' ' << k;
        }
        EXPECT_EQ(sum, 1);
        EXPECT_EQ(tree.probs.size(), binomial(n, k));
      }
    }
  }
}

TEST(TranscriptProb, LongDoubleCloseToExactAtScale) {
  const std::uint64_t n = 10'000'000;
  for (std::uint64_t k : {1ull, 7ull, 50ull}) {
    auto p = DpIrParams::with_k(n, 0.5, k);
    IrTranscript t;
    for (std::uint64_t i = 0; i < k; ++i) t.indices.push_back(i + 1);
    for (BlockId q : {BlockId{1}, BlockId{n}}) {
      const double want = to_double(ir_transcript_prob_exact(n, k, Rational(1, 2), q, t));
      EXPECT_NEAR(ir_transcript_prob(p, q, t) / want, 1.0, 1e-12) << k << ' ' << q;
    }
  }
}

TEST(DpIr, RatioBoundHoldsOnEveryTranscript) {
  for (std::uint64_t n = 2; n <= 8; ++n) {
    for (std::uint64_t k = 1; k <= std::min<std::uint64_t>(n, 4); ++k) {
      const Rational alpha(1, 2);
      const Rational bound = ratio_bound(n, k, alpha);
      for (const auto& t : all_subsets(n, k)) {
        for (BlockId q = 1; q <= n; ++q) {
          for (BlockId q2 = 1; q2 <= n; ++q2) {
            Rational r = ir_transcript_prob_exact(n, k, alpha, q, t) /
                         ir_transcript_prob_exact(n, k, alpha, q2, t);
            ASSERT_LE(r, bound);
          }
        }
      }
    }
  }
}

TEST(DpIr, MembershipProbabilityIsThreeQuartersAtSixThree) {
  Rational member = 0;
  for (const auto& t : all_subsets(6, 3)) {
    if (std::find(t.indices.begin(), t.indices.end(), 2) != t.indices.end()) {
      member += ir_transcript_prob_exact(6, 3, Rational(1, 2), 2, t);
    }
  }
  EXPECT_EQ(member, Rational(3, 4));
}

TEST(DpIr, EmpiricalMatchesExactWithinFourSigma) {
  for (auto [n, k] : {std::pair<std::uint64_t, std::uint64_t>{8, 4}, {6, 2}, {5, 3}}) {
    auto p = DpIrParams::with_k(n, 0.5, k);
    audit::EmpiricalConfig cfg;
    cfg.trials = 1'000'000;
    cfg.seed = 20;
    auto est = audit::empirical_ir(p, 2, cfg);
    auto exact = audit::enumerate_ir(n, k, Rational(1, 2), 2);
    auto cmp = audit::compare_cells(est, exact, 4.0);
    EXPECT_EQ(cmp.outside, 0u) << "n=" << n << " worst " << cmp.worst_sigma;
    EXPECT_EQ(cmp.cells, binomial(n, k));
  }
}

TEST(DpIr, SamplerPathsAgreeAcrossHalf) {
  // K <= n/2 uses rejection, K > n/2 a partial shuffle; both must be exact.
  for (std::uint64_t k : {3u, 4u}) {
    auto p = DpIrParams::with_k(7, 0.5, k);
    audit::EmpiricalConfig cfg;
    cfg.trials = 400'000;
    cfg.seed = 3;
    auto cmp = audit::compare_cells(audit::empirical_ir(p, 7, cfg),
                                    audit::enumerate_ir(7, k, Rational(1, 2), 7), 4.0);
    EXPECT_EQ(cmp.outside, 0u) << k << " worst " << cmp.worst_sigma;
  }
}

TEST(DpIr, StatelessAcrossHistories) {
  // Same query after two different warm-up sequences: the two samples come
  // from one distribution (two-sample chi-square, 15 cells, 4 sigma-ish cut).
  auto p = DpIrParams::with_k(6, 0.5, 2);
  ChaChaRng a(1, "a"), b(2, "b");
  std::map<std::vector<BlockId>, double> ca, cb;
  for (int i = 0; i < 100; ++i) sample_transcript(p, 1, a);
  for (int i = 0; i < 100; ++i) sample_transcript(p, 6, b);
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    ca[sample_transcript(p, 3, a).indices] += 1;
    cb[sample_transcript(p, 3, b).indices] += 1;
  }
  double chi = 0;
  for (auto& [t, x] : ca) {
    double y = cb[t];
    chi += (x - y) * (x - y) / (x + y);
  }
  // df = 14; mean 14, sd ~5.3.
  EXPECT_LT(chi, 14 + 6 * 5.3);
}

TEST(DpIr, HitsReturnTheBlockAndMissesHappenAtRateAlpha) {
  const std::uint64_t n = 40;
  blockstore::AeadCipher cipher(blockstore::CipherKey::generate());
  blockstore::MemoryStore store(n, cipher.ciphertext_size(16));
  for (BlockId i = 1; i <= n; ++i) store.upload(i, cipher.encrypt(Bytes(16, static_cast<std::uint8_t>(i))));
  auto p = DpIrParams::with_k(n, 0.3, 5);
  ChaChaRng rng(4);
  int misses = 0;
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    const BlockId q = rng.index(n);
    store.reset_counters();
    auto res = ir_query(p, q, store, cipher, rng);
    ASSERT_EQ(res.transcript.indices.size(), 5u);
    ASSERT_EQ(store.counters().downloads, 5u);
    ASSERT_EQ(store.counters().uploads, 0u);
    if (res.hit()) {
      ASSERT_EQ(*res.block, Bytes(16, static_cast<std::uint8_t>(q)));
      ASSERT_TRUE(std::binary_search(res.transcript.indices.begin(), res.transcript.indices.end(), q));
    } else {
      ++misses;
    }
  }
  const double sd = std::sqrt(N * 0.3 * 0.7);
  EXPECT_NEAR(misses, N * 0.3, 4 * sd);
}

TEST(DpIr, NearOneAlphaMostlyMisses) {
  blockstore::TransparentCipher cipher;
  blockstore::MemoryStore store(100, cipher.ciphertext_size(4));
  for (BlockId i = 1; i <= 100; ++i) store.upload(i, cipher.encrypt(Bytes(4, 1)));
  auto p = DpIrParams::for_budget(100, 0.999999, 0.5);
  EXPECT_EQ(p.k, 1u);
  ChaChaRng rng(8);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) hits += ir_query(p, 7, store, cipher, rng).hit();
  EXPECT_LE(hits, 2);
}

TEST(DpIr, FullDownload) {
  blockstore::TransparentCipher cipher;
  blockstore::MemoryStore store(6, cipher.ciphertext_size(4));
  for (BlockId i = 1; i <= 6; ++i) store.upload(i, cipher.encrypt(Bytes(4, static_cast<std::uint8_t>(i))));
  auto p = DpIrParams::with_k(6, 0.5, 6);
  ChaChaRng rng(8);
  int hits = 0;
  const int N = 10000;
  for (int i = 0; i < N; ++i) {
    auto res = ir_query(p, 2, store, cipher, rng);
    ASSERT_EQ(res.transcript.indices, (std::vector<BlockId>{1, 2, 3, 4, 5, 6}));
    hits += res.hit();
  }
  EXPECT_NEAR(hits, N / 2, 4 * std::sqrt(N * 0.25));
  p.answer_on_full_download = true;
  for (int i = 0; i < 100; ++i) ASSERT_TRUE(ir_query(p, 2, store, cipher, rng).hit());
}

}  // namespace
}  // namespace dpstore::dpir
