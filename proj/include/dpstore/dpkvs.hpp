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

// Differentially private key-value store.
//
// Server storage is the mapping forest, one slot per cell. A bucket is a
// leaf-to-root path; buckets are accessed through a DP-RAM whose unit is a
// whole bucket, so one bucket access moves 3 s cells (s = t * levels).
// Buckets overlap on shared ancestors. Node contents whose newest version is
// held by a stashed bucket live in a freshness map that every read consults
// first.

#ifndef DPSTORE_DPKVS_HPP_
#define DPSTORE_DPKVS_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/common.hpp"
#include "dpstore/dpram.hpp"
#include "dpstore/mapping.hpp"
#include "dpstore/random.hpp"

namespace dpstore::dpkvs {

struct KvsParams {
  mapping::ForestLayout layout;
  // Bucket stash probability stash_num / stash_den.
  std::uint64_t stash_num = 1;
  std::uint64_t stash_den = 1;
  std::size_t block_size = 1024;
  // get also issues two fake updates, so get and put look alike.
  bool uniform_shape = false;

  // Forest from layout_for(n, t, phi_exponent); threshold ceil(log2(b)^2)
  // over the b buckets.
  static KvsParams for_capacity(std::uint64_t n, std::size_t block_size = 1024,
                                std::uint32_t t = 4, double phi_exponent = 1.5);

  std::uint64_t buckets() const { return layout.leaves(); }
  // s: cells per bucket.
  std::uint64_t bucket_size() const { return layout.bucket_slots(); }
  std::size_t slot_size() const { return sizeof(mapping::KeyTag) + block_size; }
  std::uint64_t cells() const { return layout.slot_count(); }
  // DP-RAM parameters over the bucket repertoire.
  dpram::RamParams ram_params() const;

  void validate() const;
};

struct Slot {
  mapping::KeyTag tag = mapping::kEmptyTag;
  Bytes block;  // block_size bytes; zeros when empty

  bool empty() const { return tag == mapping::kEmptyTag; }
  friend bool operator==(const Slot&, const Slot&) = default;
};

struct BucketNode {
  mapping::NodeAddr node;
  std::vector<Slot> slots;  // t entries
};

// Path nodes from the leaf up.
using BucketContents = std::vector<BucketNode>;

struct SlotWrite {
  mapping::NodeAddr node;
  std::uint32_t slot = 0;
  Slot value;
};

// Bucket-granular DP-RAM. Buckets are 1-based: bucket = leaf + 1.
class BucketRam {
 public:
  struct FreshNode {
    std::vector<Slot> slots;
    std::uint32_t refs = 0;  // stashed buckets whose path holds this node
  };

  BucketRam(const KvsParams& params, blockstore::BlockStore& store,
            blockstore::Cipher& cipher, dpram::RamStreams streams);

  // Writes every node empty and draws the initial bucket stash.
  void setup(const dpram::InitialStash& law = dpram::InitialStash::product());

  BucketContents read(BlockId bucket, dpram::RamTrace* trace = nullptr);
  // Applies `writes` (all on this bucket's path) between the two phases. An
  // empty list is a fake update.
  BucketContents update(BlockId bucket, std::span<const SlotWrite> writes,
                        dpram::RamTrace* trace = nullptr);

  std::uint64_t stash_size() const { return stash_.size(); }
  bool stashed(BlockId bucket) const { return stash_.contains(bucket); }
  std::uint64_t fresh_nodes() const { return fresh_.size(); }
  std::uint64_t touches() const { return touches_; }

  const std::set<BlockId>& stash() const { return stash_; }
  const std::unordered_map<std::uint64_t, FreshNode>& fresh() const { return fresh_; }
  // Restores persisted client state; keys of `fresh` are node ordinals.
  void restore(std::set<BlockId> stash, std::unordered_map<std::uint64_t, FreshNode> fresh);

  Bytes encode_slot(const Slot& slot) const;
  Slot decode_slot(ByteView plain) const;

 private:
  BucketContents access(BlockId bucket, std::span<const SlotWrite> writes,
                        dpram::RamTrace* trace);
  std::vector<Bytes> download_path(BlockId bucket);
  void release(std::uint64_t ordinal);
  void retain(std::uint64_t ordinal, const std::vector<Slot>& slots);

  KvsParams params_;
  blockstore::BlockStore& store_;
  blockstore::Cipher& cipher_;
  dpram::RamStreams streams_;
  std::set<BlockId> stash_;
  std::unordered_map<std::uint64_t, FreshNode> fresh_;
  std::uint64_t touches_ = 0;
};

struct KvsStats {
  std::uint64_t stash_buckets = 0;
  std::uint64_t fresh_nodes = 0;
  std::uint64_t super_root_load = 0;
  std::uint64_t phi = 0;
  std::uint64_t bucket_size = 0;
  std::uint64_t blocks_per_get = 0;
  std::uint64_t blocks_per_put = 0;
  unsigned epsilon_multiplier_get = 0;
  unsigned epsilon_multiplier_put = 0;
};

class KvsClient {
 public:
  KvsClient(const KvsParams& params, blockstore::BlockStore& store, blockstore::Cipher& cipher,
            mapping::MappingFn mapping, mapping::TagFn tags, dpram::RamStreams streams,
            ChaChaRng pad_rng);

  void setup(const dpram::InitialStash& law = dpram::InitialStash::product());

  // nullopt for an absent key.
  std::optional<Bytes> get(ByteView key);
  std::optional<Bytes> get(std::string_view key);
  // Insert or update. Throws CapacityError when the super root is full.
  void put(ByteView key, const Bytes& value);
  void put(std::string_view key, const Bytes& value);

  // Bucket DP-RAM queries per operation.
  unsigned queries_per_get() const { return params_.uniform_shape ? 4 : 2; }
  static constexpr unsigned queries_per_put() { return 4; }

  KvsStats stats() const;
  const KvsParams& params() const { return params_; }
  BucketRam& ram() { return ram_; }
  const BucketRam& ram() const { return ram_; }
  const std::unordered_map<mapping::KeyTag, Bytes, mapping::TagHash>& super_root() const {
    return super_root_;
  }
  void restore_super_root(std::unordered_map<mapping::KeyTag, Bytes, mapping::TagHash> root);
  std::uint64_t touches() const { return ram_.touches(); }

  // Bucket indices (1-based) Pi(u), padded to two distinct buckets.
  std::pair<BlockId, BlockId> buckets_for(ByteView key);

 private:
  struct Found {
    bool in_super_root = false;
    mapping::NodeAddr node;
    std::uint32_t slot = 0;
    Bytes block;
  };

  struct Route {
    BlockId a = 0;
    BlockId b = 0;
    bool padded = false;  // Pi(u) gave one leaf; b is a random pad
  };
  Route route(ByteView key);

  std::optional<Found> find(const mapping::KeyTag& tag, const BucketContents& a,
                            const BucketContents& b) const;

  KvsParams params_;
  mapping::MappingFn mapping_;
  mapping::TagFn tags_;
  BucketRam ram_;
  ChaChaRng pad_rng_;
  std::unordered_map<mapping::KeyTag, Bytes, mapping::TagHash> super_root_;
};

}  // namespace dpstore::dpkvs

#endif  // DPSTORE_DPKVS_HPP_
