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

// Errorless differentially private RAM over an encrypted array of n cells
// plus a client stash.
//
// Every block is in the stash independently with probability p. A query for
// block q runs two phases against the server:
//
//   download   q stashed: take it from the stash, download a uniform dummy d.
//              otherwise: download d = q and decrypt.
//   overwrite  with probability p: stash q, then download a uniform o,
//              re-encrypt it and upload it back.
//              otherwise: download o = q, discard it, upload a fresh
//              encryption of the current value of q.
//
// The server sees (d, o) per query and three cell touches, always.

#ifndef DPSTORE_DPRAM_HPP_
#define DPSTORE_DPRAM_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/common.hpp"
#include "dpstore/random.hpp"
#include "dpstore/rational.hpp"

namespace dpstore::dpram {

// Stash probability p = stash_num / stash_den, realized by drawing r uniform
// on [stash_den] and stashing iff r <= stash_num. The usual configuration is
// a threshold C with p = C / n (stash_den == n).
struct RamParams {
  std::uint64_t n = 0;
  std::uint64_t stash_num = 0;
  std::uint64_t stash_den = 1;
  std::size_t block_size = 1024;

  static RamParams with_threshold(std::uint64_t n, std::uint64_t threshold,
                                  std::size_t block_size = 1024);
  static RamParams with_probability(std::uint64_t n, std::uint64_t num, std::uint64_t den,
                                    std::size_t block_size = 1024);
  // ceil(log2(n)^2), clamped to [1, n].
  static std::uint64_t default_threshold(std::uint64_t n);

  Rational p() const { return Rational(stash_num, stash_den); }
  double p_double() const {
    return static_cast<double>(stash_num) / static_cast<double>(stash_den);
  }
  // Expected stash occupancy p * n.
  double expected_stash() const { return p_double() * static_cast<double>(n); }

  void validate() const;
  // Set when p * n falls below the (log2 n)^2 guidance. Not an error.
  std::optional<std::string> threshold_warning() const;
};

enum class Op { kRead, kWrite };

struct RamQuery {
  BlockId index = 0;
  Op op = Op::kRead;
  Bytes new_block;  // used iff op == kWrite

  static RamQuery read(BlockId i) { return {i, Op::kRead, {}}; }
  static RamQuery write(BlockId i, Bytes b) { return {i, Op::kWrite, std::move(b)}; }
};

// Adversary view of one query.
struct RamTrace {
  BlockId d = 0;
  BlockId o = 0;

  friend bool operator==(const RamTrace&, const RamTrace&) = default;
};

// The four independent random sub-streams a client consumes. Seeding them
// by name lets a test replay the exact draws of a run.
struct RamStreams {
  ChaChaRng membership;  // setup stash draws
  ChaChaRng dummy;       // d when the queried block is stashed
  ChaChaRng coin;        // overwrite-phase r
  ChaChaRng target;      // o when the block is stashed

  static RamStreams from_seed(std::uint64_t seed);
  static RamStreams from_rng(const ChaChaRng& root);
  static RamStreams from_os();
};

// Initial stash law: independent Bernoulli(p) per block, or a fixed set.
struct InitialStash {
  bool bernoulli = true;
  std::set<BlockId> members;

  static InitialStash product() { return {}; }
  static InitialStash fixed(std::set<BlockId> members) { return {false, std::move(members)}; }
};

struct AuditRecord {
  std::uint64_t seq = 0;
  BlockId index = 0;
  Op op = Op::kRead;
  RamTrace trace;
};

void write_audit_csv(std::ostream& out, std::span<const AuditRecord> records);

// Client state for one DP-RAM instance. Not thread-safe; one logical client.
class RamClient {
 public:
  RamClient(RamParams params, blockstore::BlockStore& store, blockstore::Cipher& cipher,
            RamStreams streams);

  // Encrypts every block into its cell and draws the initial stash.
  void setup(std::span<const Bytes> blocks, const InitialStash& law = InitialStash::product());

  // Returns the current value of the block (the new value for a write) and
  // the trace the server observed.
  std::pair<Bytes, RamTrace> query(const RamQuery& q);

  Bytes read(BlockId i) { return query(RamQuery::read(i)).first; }
  void write(BlockId i, Bytes b) { query(RamQuery::write(i, std::move(b))); }

  const RamParams& params() const { return params_; }
  std::size_t stash_size() const { return stash_.size(); }
  bool stashed(BlockId i) const { return stash_.contains(i); }
  const std::unordered_map<BlockId, Bytes>& stash() const { return stash_; }
  // Restores a persisted stash (CLI sessions).
  void restore_stash(std::unordered_map<BlockId, Bytes> stash);

  // Rejects writes (retrieval-only deployments).
  void set_read_only(bool read_only) { read_only_ = read_only; }

  // Cell touches this client issued, for cross-checking store counters.
  std::uint64_t touches() const { return touches_; }

  void enable_audit_log(bool on) { audit_ = on; }
  const std::vector<AuditRecord>& audit_log() const { return audit_log_; }

 private:
  Bytes download(BlockId addr);
  void upload(BlockId addr, ByteView ct);
  bool coin();

  RamParams params_;
  blockstore::BlockStore& store_;
  blockstore::Cipher& cipher_;
  RamStreams streams_;
  std::unordered_map<BlockId, Bytes> stash_;
  bool read_only_ = false;
  std::uint64_t touches_ = 0;
  bool audit_ = false;
  std::uint64_t seq_ = 0;
  std::vector<AuditRecord> audit_log_;
};

// Pr[o == o_index] for a query of q: (1 - p) + p / n if equal, else p / n.
Rational overwrite_marginal(const RamParams& params, BlockId q, BlockId o_index);

// What is known about the stash state of q at the start of its download
// phase: first access ever, or the overwrite index of the previous query to q.
struct PrevCase {
  enum class Kind { kFirstAccess, kPrevOverwroteSelf, kPrevOverwroteOther };
  Kind kind = Kind::kFirstAccess;
  std::optional<BlockId> previous_overwrite;

  static PrevCase first_access() { return {}; }
  static PrevCase after(BlockId q, BlockId previous_overwrite);
};

// Pr[d | case] for a query of q, with a product-law initial stash:
//   first access:             (1 - p) + p / n  if d == q, else p / n
//   previous o == q:          ((1 - p) + p / n^2) / ((1 - p) + p / n)  if d == q
//                             (p / n^2) / ((1 - p) + p / n)             else
//   previous o != q:          1 / n
// Throws ParameterError when the case contradicts q.
Rational download_conditional(const RamParams& params, const PrevCase& prev, BlockId q,
                              BlockId d);

}  // namespace dpstore::dpram

#endif  // DPSTORE_DPRAM_HPP_
