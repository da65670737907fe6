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

#include "dpstore/dpkvs.hpp"

#include <algorithm>
#include <cstring>

namespace dpstore::dpkvs {

using mapping::KeyTag;
using mapping::NodeAddr;

KvsParams KvsParams::for_capacity(std::uint64_t n, std::size_t block_size, std::uint32_t t,
                                  double phi_exponent) {
  KvsParams p;
  p.layout = mapping::layout_for(n, t, phi_exponent);
  p.stash_num = dpram::RamParams::default_threshold(p.buckets());
  p.stash_den = p.buckets();
  p.block_size = block_size;
  p.validate();
  return p;
}

dpram::RamParams KvsParams::ram_params() const {
  return dpram::RamParams::with_probability(buckets(), stash_num, stash_den, slot_size());
}

void KvsParams::validate() const {
  if (layout.leaves() == 0 || layout.t == 0) throw ParameterError("empty forest layout");
  if (block_size == 0) throw ParameterError("block size must be positive");
  ram_params().validate();
}

BucketRam::BucketRam(const KvsParams& params, blockstore::BlockStore& store,
                     blockstore::Cipher& cipher, dpram::RamStreams streams)
    : params_(params), store_(store), cipher_(cipher), streams_(std::move(streams)) {
  params_.validate();
  if (store_.cells() < params_.cells()) {
    throw ParameterError("store has " + std::to_string(store_.cells()) + " cells, forest needs " +
                         std::to_string(params_.cells()));
  }
  if (store_.cell_size() != cipher_.ciphertext_size(params_.slot_size())) {
    throw ParameterError("store cell size does not match slot size + cipher overhead");
  }
}

Bytes BucketRam::encode_slot(const Slot& slot) const {
  Bytes out(params_.slot_size(), 0);
  std::memcpy(out.data(), slot.tag.data(), slot.tag.size());
  if (!slot.block.empty()) {
    if (slot.block.size() != params_.block_size) throw ParameterError("slot block has wrong size");
    std::memcpy(out.data() + slot.tag.size(), slot.block.data(), slot.block.size());
  }
  return out;
}

Slot BucketRam::decode_slot(ByteView plain) const {
  if (plain.size() != params_.slot_size()) throw FrameError("slot plaintext has wrong size");
  Slot slot;
  std::memcpy(slot.tag.data(), plain.data(), slot.tag.size());
  slot.block.assign(plain.begin() + slot.tag.size(), plain.end());
  return slot;
}

void BucketRam::setup(const dpram::InitialStash& law) {
  stash_.clear();
  fresh_.clear();
  const Bytes empty = encode_slot(Slot{mapping::kEmptyTag, Bytes(params_.block_size, 0)});
  for (BlockId cell = 1; cell <= params_.cells(); ++cell) {
    ++touches_;
    store_.upload(cell, cipher_.encrypt(empty));
  }
  const std::vector<Slot> empty_node(params_.layout.t,
                                     Slot{mapping::kEmptyTag, Bytes(params_.block_size, 0)});
  for (BlockId bucket = 1; bucket <= params_.buckets(); ++bucket) {
    bool stash_it = law.bernoulli
                        ? streams_.membership.index(params_.stash_den) <= params_.stash_num
                        : law.members.contains(bucket);
    if (!stash_it) continue;
    stash_.insert(bucket);
    for (const NodeAddr& node : mapping::bucket_path(params_.layout, bucket - 1)) {
      retain(mapping::node_ordinal(params_.layout, node), empty_node);
    }
  }
}

void BucketRam::restore(std::set<BlockId> stash,
                        std::unordered_map<std::uint64_t, FreshNode> fresh) {
  for (BlockId b : stash) {
    if (b < 1 || b > params_.buckets()) throw ParameterError("persisted bucket out of range");
  }
  for (const auto& [ord, node] : fresh) {
    if (ord >= params_.layout.node_count() || node.slots.size() != params_.layout.t ||
        node.refs == 0) {
      throw ParameterError("persisted freshness entry is inconsistent");
    }
  }
  stash_ = std::move(stash);
  fresh_ = std::move(fresh);
}

void BucketRam::retain(std::uint64_t ordinal, const std::vector<Slot>& slots) {
  auto& entry = fresh_[ordinal];
  entry.slots = slots;
  ++entry.refs;
}

void BucketRam::release(std::uint64_t ordinal) {
  auto it = fresh_.find(ordinal);
  if (it != fresh_.end() && --it->second.refs == 0) fresh_.erase(it);
}

std::vector<Bytes> BucketRam::download_path(BlockId bucket) {
  std::vector<Bytes> cts;
  cts.reserve(params_.bucket_size());
  for (const NodeAddr& node : mapping::bucket_path(params_.layout, bucket - 1)) {
    for (std::uint32_t s = 0; s < params_.layout.t; ++s) {
      ++touches_;
      cts.push_back(store_.download(mapping::slot_address(params_.layout, node, s)));
    }
  }
  return cts;
}

BucketContents BucketRam::read(BlockId bucket, dpram::RamTrace* trace) {
  return access(bucket, {}, trace);
}

BucketContents BucketRam::update(BlockId bucket, std::span<const SlotWrite> writes,
                                 dpram::RamTrace* trace) {
  return access(bucket, writes, trace);
}

BucketContents BucketRam::access(BlockId bucket, std::span<const SlotWrite> writes,
                                 dpram::RamTrace* trace) {
  const std::uint64_t b = params_.buckets();
  if (bucket < 1 || bucket > b) throw ParameterError("bucket index outside [1, b]");
  const auto& layout = params_.layout;
  const std::uint32_t t = layout.t;
  const auto path = mapping::bucket_path(layout, bucket - 1);
  for (const SlotWrite& w : writes) {
    if (w.node.height >= path.size() || path[w.node.height] != w.node || w.slot >= t) {
      throw ParameterError("slot write is not on this bucket's path");
    }
  }

  dpram::RamTrace tr;
  BucketContents contents(path.size());

  // Download phase.
  if (stash_.contains(bucket)) {
    tr.d = streams_.dummy.index(b);
    download_path(tr.d);
    for (std::size_t h = 0; h < path.size(); ++h) {
      const std::uint64_t ord = mapping::node_ordinal(layout, path[h]);
      contents[h] = {path[h], fresh_.at(ord).slots};
    }
    stash_.erase(bucket);
    for (const NodeAddr& node : path) release(mapping::node_ordinal(layout, node));
  } else {
    tr.d = bucket;
    auto cts = download_path(bucket);
    for (std::size_t h = 0; h < path.size(); ++h) {
      contents[h].node = path[h];
      const std::uint64_t ord = mapping::node_ordinal(layout, path[h]);
      if (auto it = fresh_.find(ord); it != fresh_.end()) {
        contents[h].slots = it->second.slots;
        continue;
      }
      contents[h].slots.reserve(t);
      for (std::uint32_t s = 0; s < t; ++s) {
        contents[h].slots.push_back(decode_slot(cipher_.decrypt(cts[h * t + s])));
      }
    }
  }

  for (const SlotWrite& w : writes) {
    if (!w.value.empty() && w.value.block.size() != params_.block_size) {
      throw ParameterError("slot block has wrong size");
    }
    Slot value = w.value;
    if (value.block.empty()) value.block.assign(params_.block_size, 0);
    contents[w.node.height].slots[w.slot] = value;
    const std::uint64_t ord = mapping::node_ordinal(layout, w.node);
    if (auto it = fresh_.find(ord); it != fresh_.end()) it->second.slots[w.slot] = value;
  }

  // Overwrite phase.
  if (streams_.coin.index(params_.stash_den) <= params_.stash_num) {
    stash_.insert(bucket);
    for (const BucketNode& n : contents) retain(mapping::node_ordinal(layout, n.node), n.slots);
    tr.o = streams_.target.index(b);
    auto cts = download_path(tr.o);
    const auto other = mapping::bucket_path(layout, tr.o - 1);
    for (std::size_t h = 0; h < other.size(); ++h) {
      const std::uint64_t ord = mapping::node_ordinal(layout, other[h]);
      auto it = fresh_.find(ord);
      for (std::uint32_t s = 0; s < t; ++s) {
        Bytes plain = it != fresh_.end() ? encode_slot(it->second.slots[s])
                                         : cipher_.decrypt(cts[h * t + s]);
        ++touches_;
        store_.upload(mapping::slot_address(layout, other[h], s), cipher_.encrypt(plain));
      }
    }
  } else {
    tr.o = bucket;
    download_path(bucket);
    for (const BucketNode& n : contents) {
      for (std::uint32_t s = 0; s < t; ++s) {
        ++touches_;
        store_.upload(mapping::slot_address(layout, n.node, s),
                      cipher_.encrypt(encode_slot(n.slots[s])));
      }
    }
  }

  if (trace) *trace = tr;
  return contents;
}

KvsClient::KvsClient(const KvsParams& params, blockstore::BlockStore& store,
                     blockstore::Cipher& cipher, mapping::MappingFn mapping,
                     mapping::TagFn tags, dpram::RamStreams streams, ChaChaRng pad_rng)
    : params_(params),
      mapping_(std::move(mapping)),
      tags_(std::move(tags)),
      ram_(params, store, cipher, std::move(streams)),
      pad_rng_(std::move(pad_rng)) {
  if (params_.buckets() < 2) throw ParameterError("key-value store needs at least 2 buckets");
}

void KvsClient::setup(const dpram::InitialStash& law) {
  super_root_.clear();
  ram_.setup(law);
}

void KvsClient::restore_super_root(
    std::unordered_map<mapping::KeyTag, Bytes, mapping::TagHash> root) {
  if (root.size() > params_.layout.phi) throw ParameterError("super root over capacity");
  for (const auto& [tag, block] : root) {
    if (block.size() != params_.block_size) throw ParameterError("super-root block size");
  }
  super_root_ = std::move(root);
}

KvsClient::Route KvsClient::route(ByteView key) {
  const std::uint64_t b = params_.buckets();
  auto [x, y] = mapping_.leaves(key, b);
  if (x != y) return {x + 1, y + 1, false};
  // Pad with a uniform bucket other than x. The pad is only ever accessed,
  // never stored into: it changes from call to call.
  std::uint64_t pad = pad_rng_.below(b - 1);
  if (pad >= x) ++pad;
  return {x + 1, pad + 1, true};
}

std::pair<BlockId, BlockId> KvsClient::buckets_for(ByteView key) {
  const Route r = route(key);
  return {r.a, r.b};
}

std::optional<KvsClient::Found> KvsClient::find(const KeyTag& tag, const BucketContents& a,
                                                const BucketContents& b) const {
  std::optional<Found> found;
  for (const BucketContents* contents : {&a, &b}) {
    for (const BucketNode& node : *contents) {
      for (std::uint32_t s = 0; s < node.slots.size(); ++s) {
        if (!found && node.slots[s].tag == tag) {
          found = Found{false, node.node, s, node.slots[s].block};
        }
      }
    }
  }
  if (!found) {
    if (auto it = super_root_.find(tag); it != super_root_.end()) {
      found = Found{true, {}, 0, it->second};
    }
  }
  return found;
}

std::optional<Bytes> KvsClient::get(ByteView key) {
  const KeyTag tag = tags_(key);
  auto [a, b] = buckets_for(key);
  BucketContents ca = ram_.read(a);
  BucketContents cb = ram_.read(b);
  auto found = find(tag, ca, cb);
  if (params_.uniform_shape) {
    ram_.update(a, {});
    ram_.update(b, {});
  }
  if (!found) return std::nullopt;
  return std::move(found->block);
}

std::optional<Bytes> KvsClient::get(std::string_view key) {
  return get(ByteView(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()));
}

void KvsClient::put(ByteView key, const Bytes& value) {
  if (value.size() != params_.block_size) {
    throw ParameterError("value must be exactly " + std::to_string(params_.block_size) +
                         " bytes");
  }
  const KeyTag tag = tags_(key);
  const auto [a, b, padded] = route(key);
  BucketContents ca = ram_.read(a);
  BucketContents cb = ram_.read(b);

  std::optional<NodeAddr> target;
  std::uint32_t slot = 0;
  bool overflow = false;
  if (auto found = find(tag, ca, cb)) {
    if (found->in_super_root) {
      super_root_[tag] = value;
    } else {
      target = found->node;
      slot = found->slot;
    }
  } else {
    auto room = [&](const NodeAddr& node) {
      for (const BucketContents* c : {&ca, &cb}) {
        const BucketNode& bn = (*c)[node.height];
        if (bn.node == node) {
          return std::any_of(bn.slots.begin(), bn.slots.end(),
                             [](const Slot& s) { return s.empty(); });
        }
      }
      return false;
    };
    target = mapping::choose_node(params_.layout, a - 1, (padded ? a : b) - 1, room);
    if (target) {
      const BucketContents& c = ca[target->height].node == *target ? ca : cb;
      const auto& slots = c[target->height].slots;
      while (!slots[slot].empty()) ++slot;
    } else if (super_root_.size() < params_.layout.phi) {
      super_root_.emplace(tag, value);
    } else {
      overflow = true;
    }
  }

  std::vector<SlotWrite> writes;
  if (target) writes.push_back({*target, slot, Slot{tag, value}});
  const bool on_a = target && ca[target->height].node == *target;
  ram_.update(a, on_a ? std::span<const SlotWrite>(writes) : std::span<const SlotWrite>());
  ram_.update(b, !on_a ? std::span<const SlotWrite>(writes) : std::span<const SlotWrite>());
  if (overflow) throw CapacityError("super root is full; key could not be placed");
}

void KvsClient::put(std::string_view key, const Bytes& value) {
  put(ByteView(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()), value);
}

KvsStats KvsClient::stats() const {
  KvsStats s;
  s.stash_buckets = ram_.stash_size();
  s.fresh_nodes = ram_.fresh_nodes();
  s.super_root_load = super_root_.size();
  s.phi = params_.layout.phi;
  s.bucket_size = params_.bucket_size();
  s.blocks_per_get = std::uint64_t{queries_per_get()} * 3 * params_.bucket_size();
  s.blocks_per_put = std::uint64_t{queries_per_put()} * 3 * params_.bucket_size();
  s.epsilon_multiplier_get = queries_per_get() == 4 ? 4 : 2;
  s.epsilon_multiplier_put = 4;
  return s;
}

}  // namespace dpstore::dpkvs
