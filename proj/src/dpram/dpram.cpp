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

#include "dpstore/dpram.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dpstore::dpram {

RamParams RamParams::with_threshold(std::uint64_t n, std::uint64_t threshold,
                                    std::size_t block_size) {
  RamParams p;
  p.n = n;
  p.stash_num = threshold;
  p.stash_den = n;
  p.block_size = block_size;
  p.validate();
  return p;
}

RamParams RamParams::with_probability(std::uint64_t n, std::uint64_t num, std::uint64_t den,
                                      std::size_t block_size) {
  RamParams p;
  p.n = n;
  p.stash_num = num;
  p.stash_den = den;
  p.block_size = block_size;
  p.validate();
  return p;
}

std::uint64_t RamParams::default_threshold(std::uint64_t n) {
  if (n < 2) return 1;
  double lg = std::log2(static_cast<double>(n));
  auto c = static_cast<std::uint64_t>(std::ceil(lg * lg - 1e-9));
  return std::clamp<std::uint64_t>(c, 1, n);
}

void RamParams::validate() const {
  if (n == 0) throw ParameterError("n must be at least 1");
  if (stash_den == 0) throw ParameterError("stash probability denominator is zero");
  if (stash_num == 0) {
    throw ParameterError("stash probability must be positive (threshold C >= 1)");
  }
  if (stash_num > stash_den) throw ParameterError("stash probability exceeds 1");
  if (block_size == 0) throw ParameterError("block size must be positive");
}

std::optional<std::string> RamParams::threshold_warning() const {
  double guidance = static_cast<double>(default_threshold(n));
  if (expected_stash() + 1e-9 < guidance) {
    return "stash threshold p*n = " + std::to_string(expected_stash()) +
           " is below the (log2 n)^2 = " + std::to_string(guidance) +
           " guidance; stash-size bounds may not hold";
  }
  return std::nullopt;
}

RamStreams RamStreams::from_rng(const ChaChaRng& root) {
  return RamStreams{root.derive("membership"), root.derive("dummy"), root.derive("coin"),
                    root.derive("target")};
}

RamStreams RamStreams::from_seed(std::uint64_t seed) {
  return from_rng(ChaChaRng(seed, "dpram"));
}

RamStreams RamStreams::from_os() { return from_rng(ChaChaRng::from_os()); }

void write_audit_csv(std::ostream& out, std::span<const AuditRecord> records) {
  out << "seq,query_index,op,d,o\n";
  for (const auto& r : records) {
    out << r.seq << ',' << r.index << ',' << (r.op == Op::kRead ? "read" : "write") << ','
        << r.trace.d << ',' << r.trace.o << '\n';
  }
}

RamClient::RamClient(RamParams params, blockstore::BlockStore& store,
                     blockstore::Cipher& cipher, RamStreams streams)
    : params_(params), store_(store), cipher_(cipher), streams_(std::move(streams)) {
  params_.validate();
  if (store_.cells() < params_.n) throw ParameterError("store holds fewer than n cells");
  if (store_.cell_size() != cipher_.ciphertext_size(params_.block_size)) {
    throw ParameterError("store cell size " + std::to_string(store_.cell_size()) +
                         " does not match block size + cipher overhead " +
                         std::to_string(cipher_.ciphertext_size(params_.block_size)));
  }
}

bool RamClient::coin() {
  return streams_.coin.index(params_.stash_den) <= params_.stash_num;
}

Bytes RamClient::download(BlockId addr) {
  ++touches_;
  return store_.download(addr);
}

void RamClient::upload(BlockId addr, ByteView ct) {
  ++touches_;
  store_.upload(addr, ct);
}

void RamClient::setup(std::span<const Bytes> blocks, const InitialStash& law) {
  if (blocks.size() != params_.n) {
    throw ParameterError("setup needs exactly n = " + std::to_string(params_.n) +
                         " blocks, got " + std::to_string(blocks.size()));
  }
  for (const auto& b : blocks) {
    if (b.size() != params_.block_size) throw ParameterError("block of the wrong size");
  }
  stash_.clear();
  for (BlockId i = 1; i <= params_.n; ++i) {
    const Bytes& block = blocks[i - 1];
    upload(i, cipher_.encrypt(block));
    bool stash_it = law.bernoulli
                        ? streams_.membership.index(params_.stash_den) <= params_.stash_num
                        : law.members.contains(i);
    if (stash_it) stash_.emplace(i, block);
  }
}

std::pair<Bytes, RamTrace> RamClient::query(const RamQuery& q) {
  if (q.index < 1 || q.index > params_.n) {
    throw ParameterError("query index " + std::to_string(q.index) + " outside [1, n]");
  }
  if (q.op == Op::kWrite) {
    if (read_only_) throw ParameterError("client is read-only; writes are refused");
    if (q.new_block.size() != params_.block_size) {
      throw ParameterError("written block has the wrong size");
    }
  }
  RamTrace trace;
  Bytes block;

  // Download phase.
  if (auto it = stash_.find(q.index); it != stash_.end()) {
    trace.d = streams_.dummy.index(params_.n);
    download(trace.d);
    block = std::move(it->second);
    stash_.erase(it);
  } else {
    trace.d = q.index;
    block = cipher_.decrypt(download(trace.d));
  }

  if (q.op == Op::kWrite) block = q.new_block;

  // Overwrite phase.
  if (coin()) {
    stash_.emplace(q.index, block);
    trace.o = streams_.target.index(params_.n);
    Bytes refreshed = cipher_.encrypt(cipher_.decrypt(download(trace.o)));
    upload(trace.o, refreshed);
  } else {
    trace.o = q.index;
    download(trace.o);
    upload(trace.o, cipher_.encrypt(block));
  }

  if (audit_) audit_log_.push_back({++seq_, q.index, q.op, trace});
  return {std::move(block), trace};
}

void RamClient::restore_stash(std::unordered_map<BlockId, Bytes> stash) {
  for (const auto& [id, block] : stash) {
    if (id < 1 || id > params_.n || block.size() != params_.block_size) {
      throw ParameterError("persisted stash entry is inconsistent with the parameters");
    }
  }
  stash_ = std::move(stash);
}

Rational overwrite_marginal(const RamParams& params, BlockId q, BlockId o_index) {
  params.validate();
  if (q < 1 || q > params.n || o_index < 1 || o_index > params.n) {
    throw ParameterError("index outside [1, n]");
  }
  const Rational p = params.p();
  const Rational uniform = p / Rational(params.n);
  return o_index == q ? (Rational(1) - p) + uniform : uniform;
}

PrevCase PrevCase::after(BlockId q, BlockId previous_overwrite) {
  PrevCase c;
  c.kind = previous_overwrite == q ? Kind::kPrevOverwroteSelf : Kind::kPrevOverwroteOther;
  c.previous_overwrite = previous_overwrite;
  return c;
}

Rational download_conditional(const RamParams& params, const PrevCase& prev, BlockId q,
                              BlockId d) {
  params.validate();
  if (q < 1 || q > params.n || d < 1 || d > params.n) {
    throw ParameterError("index outside [1, n]");
  }
  const Rational p = params.p();
  const Rational n(params.n);
  switch (prev.kind) {
    case PrevCase::Kind::kFirstAccess:
      if (prev.previous_overwrite) {
        throw ParameterError("first access cannot carry a previous overwrite index");
      }
      return d == q ? (Rational(1) - p) + p / n : p / n;
    case PrevCase::Kind::kPrevOverwroteSelf: {
      if (!prev.previous_overwrite || *prev.previous_overwrite != q) {
        throw ParameterError("case says the previous overwrite hit q, index disagrees");
      }
      // Joint with the previous overwrite landing on q, over its marginal.
      const Rational marginal = (Rational(1) - p) + p / n;
      const Rational joint = d == q ? (Rational(1) - p) + p / (n * n) : p / (n * n);
      return joint / marginal;
    }
    case PrevCase::Kind::kPrevOverwroteOther:
      if (!prev.previous_overwrite || *prev.previous_overwrite == q ||
          *prev.previous_overwrite < 1 || *prev.previous_overwrite > params.n) {
        throw ParameterError("case says the previous overwrite missed q, index disagrees");
      }
      // q was certainly stashed, so d is uniform.
      return Rational(1) / n;
  }
  throw ParameterError("unknown case");
}

}  // namespace dpstore::dpram
