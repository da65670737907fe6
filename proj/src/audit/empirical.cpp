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

#include "dpstore/audit/empirical.hpp"

#include <algorithm>
#include <functional>
#include <thread>

#include "dpstore/audit/oracle.hpp"
#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/cipher.hpp"

namespace dpstore::audit {

namespace {

using Counts = std::map<Transcript, std::uint64_t>;
// Runs `trials` trials with the chunk's stream, adding into `counts`.
using ChunkFn = std::function<void(ChaChaRng&, std::uint64_t trials, Counts& counts)>;

TraceDistribution run_chunks(const EmpiricalConfig& config, std::string_view label,
                             const ChunkFn& fn) {
  if (config.trials < 10'000 && !config.allow_small) {
    throw ParameterError("empirical estimates need at least 10^4 trials");
  }
  if (config.trials == 0) throw ParameterError("no trials");
  const ChaChaRng root(config.seed, label);
  std::vector<Counts> partial(kChunks);
  auto work = [&](unsigned chunk) {
    std::uint64_t share = config.trials / kChunks + (chunk < config.trials % kChunks ? 1 : 0);
    if (!share) return;
    ChaChaRng rng = root.derive(chunk);
    fn(rng, share, partial[chunk]);
  };
  const unsigned threads = std::clamp(config.threads, 1u, kChunks);
  if (threads == 1) {
    for (unsigned c = 0; c < kChunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (unsigned c = w; c < kChunks; c += threads) work(c);
      });
    }
    for (auto& th : pool) th.join();
  }
  Counts total;
  for (auto& part : partial) {
    for (auto& [t, c] : part) total[t] += c;
  }
  return TraceDistribution::from_counts(std::move(total), config.trials);
}

}  // namespace

TraceDistribution empirical_ram(const dpram::RamParams& params, std::span<const BlockId> q,
                                const dpram::InitialStash& law, const EmpiricalConfig& config) {
  params.validate();
  for (BlockId x : q) {
    if (x < 1 || x > params.n) throw ParameterError("query index outside [1, n]");
  }
  const std::vector<BlockId> seq(q.begin(), q.end());
  return run_chunks(config, "empirical-ram", [&](ChaChaRng& rng, std::uint64_t trials,
                                                 Counts& counts) {
    dpram::RamParams small = params;
    small.block_size = 1;
    blockstore::TransparentCipher cipher(rng.derive("tags"));
    blockstore::MemoryStore store(params.n, cipher.ciphertext_size(small.block_size));
    dpram::RamClient client(small, store, cipher, dpram::RamStreams::from_rng(rng));
    std::vector<Bytes> blocks(params.n, Bytes(1, 0));
    for (BlockId i = 1; i <= params.n; ++i) blocks[i - 1][0] = static_cast<std::uint8_t>(i);
    Transcript t(2 * seq.size());
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      client.setup(blocks, law);
      for (std::size_t j = 0; j < seq.size(); ++j) {
        auto trace = client.query(dpram::RamQuery::read(seq[j])).second;
        t[2 * j] = trace.d;
        t[2 * j + 1] = trace.o;
      }
      ++counts[t];
    }
  });
}

TraceDistribution empirical_ir(const dpir::DpIrParams& params, BlockId queried,
                               const EmpiricalConfig& config) {
  params.validate();
  if (queried < 1 || queried > params.n) throw ParameterError("queried index outside [1, n]");
  return run_chunks(config, "empirical-ir", [&](ChaChaRng& rng, std::uint64_t trials,
                                                Counts& counts) {
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      ++counts[dpir::sample_transcript(params, queried, rng).indices];
    }
  });
}

TraceDistribution empirical_strawman(std::uint64_t n, BlockId queried,
                                     const EmpiricalConfig& config) {
  return run_chunks(config, "empirical-strawman", [&](ChaChaRng& rng, std::uint64_t trials,
                                                      Counts& counts) {
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      ++counts[strawman_query(n, queried, rng)];
    }
  });
}

}  // namespace dpstore::audit
