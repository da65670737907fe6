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
#include <sstream>

#include "dpstore/audit/oracle.hpp"
#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/dpram.hpp"

namespace dpstore::dpram {
namespace {

using Dist = std::map<std::vector<std::uint64_t>, Rational>;

// Explicit branch tree: every random choice of setup and of each query is a
// separate branch carrying its own probability.
void brute_queries(const RamParams& p, const std::vector<BlockId>& q, std::size_t j,
                   std::vector<bool> stash, std::vector<std::uint64_t>& trace,
                   const Rational& w, Dist& out) {
  if (j == q.size()) {
    out[trace] += w;
    return;
  }
  const BlockId b = q[j];
  const Rational n(p.n), prob = p.p();
  struct Branch {
    BlockId d;
    Rational w;
  };
  std::vector<Branch> downloads;
  if (stash[b]) {
    for (BlockId d = 1; d <= p.n; ++d) downloads.push_back({d, 1 / n});
  } else {
    downloads.push_back({b, 1});
  }
  for (const auto& dl : downloads) {
    std::vector<bool> s = stash;
    s[b] = false;
    // Coin says stash: o uniform.
    for (BlockId o = 1; o <= p.n; ++o) {
      std::vector<bool> s2 = s;
      s2[b] = true;
      trace.push_back(dl.d);
      trace.push_back(o);
      brute_queries(p, q, j + 1, s2, trace, w * dl.w * prob / n, out);
      trace.resize(trace.size() - 2);
    }
    // Coin says keep: o = b.
    trace.push_back(dl.d);
    trace.push_back(b);
    brute_queries(p, q, j + 1, s, trace, w * dl.w * (1 - prob), out);
    trace.resize(trace.size() - 2);
  }
}

Dist brute_force(const RamParams& p, const std::vector<BlockId>& q) {
  Dist out;
  const Rational prob = p.p();
  for (std::uint64_t mask = 0; mask < (1ULL << p.n); ++mask) {
    std::vector<bool> stash(p.n + 1, false);
    Rational w = 1;
    for (BlockId i = 1; i <= p.n; ++i) {
      stash[i] = mask >> (i - 1) & 1;
      w *= stash[i] ? prob : 1 - prob;
    }
    std::vector<std::uint64_t> trace;
    brute_queries(p, q, 0, stash, trace, w, out);
  }
  for (auto it = out.begin(); it != out.end();) {
    it = it->second == 0 ? out.erase(it) : std::next(it);
  }
  return out;
}

TEST(Oracle, DynamicProgramMatchesBranchTree) {
  for (auto [num, den] : {std::pair<std::uint64_t, std::uint64_t>{1, 3}, {1, 2}}) {
    auto p = RamParams::with_probability(3, num, den, 1);
    for (BlockId a = 1; a <= 3; ++a) {
      for (BlockId b = 1; b <= 3; ++b) {
        std::vector<BlockId> q{a, b};
        auto dp = audit::enumerate_ram(p, q);
        auto bf = brute_force(p, q);
        ASSERT_EQ(dp.probs.size(), bf.size());
        for (const auto& [t, w] : bf) ASSERT_EQ(dp.prob(t), w) << audit::to_string(t);
      }
    }
  }
  auto p = RamParams::with_threshold(4, 2, 1);
  for (const std::vector<BlockId>& q : {std::vector<BlockId>{1, 2, 1}, {4, 4, 4}, {2, 3, 1}}) {
    auto dp = audit::enumerate_ram(p, q);
    auto bf = brute_force(p, q);
    ASSERT_EQ(dp.probs.size(), bf.size());
    for (const auto& [t, w] : bf) ASSERT_EQ(dp.prob(t), w);
  }
}

TEST(Params, Validation) {
  EXPECT_THROW(RamParams::with_threshold(8, 0), ParameterError);
  EXPECT_THROW(RamParams::with_threshold(8, 9), ParameterError);
  EXPECT_THROW(RamParams::with_probability(8, 1, 0), ParameterError);
  EXPECT_NO_THROW(RamParams::with_threshold(8, 8));
  EXPECT_EQ(RamParams::with_threshold(8, 2).p(), Rational(1, 4));
  EXPECT_EQ(RamParams::default_threshold(1024), 100u);
  EXPECT_EQ(RamParams::default_threshold(65536), 256u);
  EXPECT_EQ(RamParams::default_threshold(4), 4u);
  EXPECT_TRUE(RamParams::with_threshold(1024, 10).threshold_warning().has_value());
  EXPECT_FALSE(RamParams::with_threshold(1024, 100).threshold_warning().has_value());
}

TEST(ClosedForms, OverwriteMarginal) {
  auto p = RamParams::with_threshold(4, 2);
  EXPECT_EQ(overwrite_marginal(p, 1, 1), Rational(5, 8));
  EXPECT_EQ(overwrite_marginal(p, 1, 3), Rational(1, 8));
  for (BlockId q = 1; q <= 4; ++q) {
    Rational sum = 0;
    for (BlockId o = 1; o <= 4; ++o) sum += overwrite_marginal(p, q, o);
    EXPECT_EQ(sum, 1);
  }
}

TEST(ClosedForms, DownloadConditional) {
  auto p = RamParams::with_threshold(4, 2);
  EXPECT_EQ(download_conditional(p, PrevCase::first_access(), 2, 2), Rational(5, 8));
  EXPECT_EQ(download_conditional(p, PrevCase::first_access(), 2, 1), Rational(1, 8));
  EXPECT_EQ(download_conditional(p, PrevCase::after(2, 1), 2, 3), Rational(1, 4));
  // ((1 - p) + p / n^2) / ((1 - p) + p / n) = (17/32) / (5/8)
  EXPECT_EQ(download_conditional(p, PrevCase::after(2, 2), 2, 2), Rational(17, 20));
  for (const PrevCase& c : {PrevCase::first_access(), PrevCase::after(2, 2), PrevCase::after(2, 4)}) {
    Rational sum = 0;
    for (BlockId d = 1; d <= 4; ++d) sum += download_conditional(p, c, 2, d);
    EXPECT_EQ(sum, 1);
  }
  PrevCase bad = PrevCase::after(2, 2);
  bad.kind = PrevCase::Kind::kPrevOverwroteOther;
  EXPECT_THROW(download_conditional(p, bad, 2, 1), ParameterError);
  PrevCase bad2 = PrevCase::first_access();
  bad2.previous_overwrite = 3;
  EXPECT_THROW(download_conditional(p, bad2, 2, 1), ParameterError);
}

struct Rig {
  Rig(RamParams p, std::uint64_t seed)
      : params(p),
        cipher(blockstore::CipherKey::generate(), ChaChaRng(seed, "nonce")),
        store(p.n, cipher.ciphertext_size(p.block_size)),
        client(p, store, cipher, RamStreams::from_seed(seed)) {}

  std::vector<Bytes> blocks() const {
    std::vector<Bytes> b;
    for (BlockId i = 1; i <= params.n; ++i) {
      Bytes x(params.block_size, 0);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = static_cast<std::uint8_t>(i * 7 + k);
      b.push_back(x);
    }
    return b;
  }

  RamParams params;
  blockstore::AeadCipher cipher;
  blockstore::MemoryStore store;
  RamClient client;
};

TEST(Setup, FullThresholdStashesEverything) {
  Rig rig(RamParams::with_threshold(16, 16, 8), 1);
  rig.client.setup(rig.blocks());
  EXPECT_EQ(rig.client.stash_size(), 16u);
}

TEST(Setup, SizeMismatchRejected) {
  Rig rig(RamParams::with_threshold(4, 2, 8), 1);
  auto b = rig.blocks();
  b.pop_back();
  EXPECT_THROW(rig.client.setup(b), ParameterError);
  b = rig.blocks();
  b[1].push_back(0);
  EXPECT_THROW(rig.client.setup(b), ParameterError);
  blockstore::MemoryStore wrong(4, 9);
  EXPECT_THROW(RamClient(rig.params, wrong, rig.cipher, RamStreams::from_seed(1)), ParameterError);
}

TEST(Setup, ServerHoldsFreshEncryptions) {
  Rig rig(RamParams::with_threshold(8, 2, 8), 3);
  auto b = rig.blocks();
  rig.client.setup(b);
  for (BlockId i = 1; i <= 8; ++i) EXPECT_EQ(rig.cipher.decrypt(rig.store.download(i)), b[i - 1]);
}

TEST(Setup, StashSizeConcentrates) {
  // n = 10^4, C = 100 over 10^3 setups.
  auto p = RamParams::with_threshold(10000, 100, 1);
  blockstore::TransparentCipher cipher;
  blockstore::MemoryStore store(p.n, cipher.ciphertext_size(1));
  RamClient client(p, store, cipher, RamStreams::from_seed(5));
  std::vector<Bytes> blocks(p.n, Bytes(1, 0));
  double sum = 0;
  std::size_t worst = 0;
  for (int s = 0; s < 1000; ++s) {
    client.setup(blocks);
    sum += static_cast<double>(client.stash_size());
    worst = std::max(worst, client.stash_size());
  }
  // Mean of 1000 setups has sd ~0.31.
  EXPECT_NEAR(sum / 1000, 100, 1.5);
  EXPECT_LE(worst, 400u);
}

TEST(Query, ErrorlessAgainstReferenceMap) {
  Rig rig(RamParams::with_threshold(64, 36, 16), 9);
  auto ref = rig.blocks();
  rig.client.setup(ref);
  ChaChaRng rng(77, "ops");
  for (int op = 0; op < 100000; ++op) {
    const BlockId i = rng.index(64);
    if (rng.below(2)) {
      Bytes b(16);
      rng.fill(b.data(), b.size());
      auto [got, trace] = rig.client.query(RamQuery::write(i, b));
      ASSERT_EQ(got, b);
      ref[i - 1] = b;
    } else {
      ASSERT_EQ(rig.client.read(i), ref[i - 1]) << "op " << op;
    }
  }
}

TEST(Query, ThreeTouchesEveryTime) {
  Rig rig(RamParams::with_threshold(32, 25, 8), 2);
  rig.client.setup(rig.blocks());
  rig.store.reset_counters();
  const auto before = rig.client.touches();
  ChaChaRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto c0 = rig.store.counters();
    rig.client.read(rng.index(32));
    const auto c1 = rig.store.counters();
    ASSERT_EQ(c1.downloads - c0.downloads, 2u);
    ASSERT_EQ(c1.uploads - c0.uploads, 1u);
  }
  EXPECT_EQ(rig.client.touches() - before, rig.store.counters().touches());
}

TEST(Query, StashChangesByAtMostOne) {
  Rig rig(RamParams::with_threshold(32, 16, 8), 4);
  rig.client.setup(rig.blocks());
  ChaChaRng rng(2);
  for (int i = 0; i < 5000; ++i) {
    const auto before = rig.client.stash_size();
    const BlockId q = rng.index(32);
    const bool was = rig.client.stashed(q);
    auto [b, trace] = rig.client.query(RamQuery::read(q));
    const auto after = rig.client.stash_size();
    ASSERT_LE(after > before ? after - before : before - after, 1u);
    if (!was) ASSERT_EQ(trace.d, q);
    if (trace.o != q) ASSERT_TRUE(rig.client.stashed(q));
  }
}

TEST(Query, FirstAccessOverwriteLandsOnQueriedBlock) {
  // n = 4, p = 1/2, block 3 never stashed at setup.
  auto p = RamParams::with_threshold(4, 2, 1);
  blockstore::TransparentCipher cipher;
  blockstore::MemoryStore store(4, cipher.ciphertext_size(1));
  RamClient client(p, store, cipher, RamStreams::from_seed(12));
  std::vector<Bytes> blocks(4, Bytes(1, 0));
  const int N = 200000;
  int hits = 0;
  for (int i = 0; i < N; ++i) {
    client.setup(blocks, InitialStash::fixed({}));
    auto [b, trace] = client.query(RamQuery::read(3));
    ASSERT_EQ(trace.d, 3u);
    hits += trace.o == 3;
  }
  EXPECT_NEAR(static_cast<double>(hits) / N, 0.625, 4 * std::sqrt(0.625 * 0.375 / N));
}

TEST(Query, ReadOnlyRefusesWrites) {
  Rig rig(RamParams::with_threshold(8, 4, 8), 5);
  rig.client.setup(rig.blocks());
  rig.client.set_read_only(true);
  EXPECT_THROW(rig.client.write(1, Bytes(8, 0)), ParameterError);
  EXPECT_NO_THROW(rig.client.read(1));
}

TEST(Query, BadArgumentsAndTampering) {
  Rig rig(RamParams::with_threshold(8, 1, 8), 6);
  rig.client.setup(rig.blocks(), InitialStash::fixed({}));
  EXPECT_THROW(rig.client.read(0), ParameterError);
  EXPECT_THROW(rig.client.read(9), ParameterError);
  EXPECT_THROW(rig.client.write(1, Bytes(7, 0)), ParameterError);
  Bytes junk = rig.store.download(5);
  junk[3] ^= 0xff;
  rig.store.upload(5, junk);
  EXPECT_THROW(rig.client.read(5), IntegrityError);
}

TEST(Query, SeededStreamsReplayTraces) {
  Rig a(RamParams::with_threshold(16, 8, 4), 42), b(RamParams::with_threshold(16, 8, 4), 42);
  a.client.setup(a.blocks());
  b.client.setup(b.blocks());
  for (BlockId q : {1, 5, 5, 9, 1, 16, 2}) {
    ASSERT_EQ(a.client.query(RamQuery::read(q)).second, b.client.query(RamQuery::read(q)).second);
  }
}

TEST(AuditLog, CsvFormat) {
  Rig rig(RamParams::with_threshold(4, 1, 4), 7);
  rig.client.setup(rig.blocks(), InitialStash::fixed({}));
  rig.client.enable_audit_log(true);
  rig.client.read(2);
  rig.client.write(3, Bytes(4, 1));
  std::ostringstream out;
  write_audit_csv(out, rig.client.audit_log());
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "seq,query_index,op,d,o");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 11), "1,2,read,2,");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 12), "2,3,write,3,");
}

TEST(Stash, BoundedAtScaleShort) {
  // Two trials here; the full 20-trial run is an acceptance criterion.
  auto p = RamParams::with_threshold(1 << 16, 256, 1);
  blockstore::TransparentCipher cipher;
  blockstore::MemoryStore store(p.n, cipher.ciphertext_size(1));
  std::vector<Bytes> blocks(p.n, Bytes(1, 0));
  for (int trial = 0; trial < 2; ++trial) {
    RamClient client(p, store, cipher, RamStreams::from_seed(1000 + trial));
    client.setup(blocks);
    ChaChaRng rng(trial, "stash-ops");
    std::size_t worst = client.stash_size();
    for (int i = 0; i < 100000; ++i) {
      client.read(rng.index(p.n));
      worst = std::max(worst, client.stash_size());
    }
    EXPECT_LE(worst, 1024u);
  }
}

}  // namespace
}  // namespace dpstore::dpram
