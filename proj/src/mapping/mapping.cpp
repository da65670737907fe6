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

#include "dpstore/mapping.hpp"

#include <sodium.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace dpstore::mapping {

ForestLayout ForestLayout::make(std::uint64_t L, std::uint64_t trees, std::uint32_t t,
                                std::uint64_t phi) {
  if (L == 0 || !std::has_single_bit(L)) throw ParameterError("L must be a power of two");
  if (trees == 0) throw ParameterError("forest needs at least one tree");
  if (t == 0 || t > 255) throw ParameterError("node capacity t must be in [1, 255]");
  ForestLayout layout;
  layout.L = L;
  layout.trees = trees;
  layout.n = L * trees;
  layout.levels = static_cast<std::uint32_t>(std::countr_zero(L)) + 1;
  layout.t = t;
  layout.phi = phi;
  return layout;
}

ForestLayout layout_for(std::uint64_t n, std::uint32_t t, double phi_exponent) {
  if (n < 16) throw ParameterError("forest needs n >= 16, got " + std::to_string(n));
  if (!(phi_exponent > 0.0)) throw ParameterError("phi exponent must be positive");
  const double lg = std::log2(static_cast<double>(n));
  auto want = static_cast<std::uint64_t>(std::ceil(lg - 1e-12));
  std::uint64_t L = std::bit_ceil(want);
  std::uint64_t trees = (n + L - 1) / L;
  auto phi = static_cast<std::uint64_t>(std::ceil(std::pow(lg, phi_exponent) - 1e-9));
  ForestLayout layout = ForestLayout::make(L, trees, t, phi);
  layout.n = n;
  return layout;
}

namespace {

std::uint64_t level_offset(const ForestLayout& layout, std::uint32_t h) {
  return 2 * layout.L - ((2 * layout.L) >> h);
}

}  // namespace

std::uint64_t node_ordinal(const ForestLayout& layout, const NodeAddr& node) {
  return node.tree * layout.nodes_per_tree() + level_offset(layout, node.height) + node.index;
}

NodeAddr node_at(const ForestLayout& layout, std::uint64_t ordinal) {
  NodeAddr node;
  node.tree = ordinal / layout.nodes_per_tree();
  std::uint64_t rest = ordinal % layout.nodes_per_tree();
  std::uint32_t h = 0;
  while (rest >= layout.nodes_at_height(h)) {
    rest -= layout.nodes_at_height(h);
    ++h;
  }
  node.height = h;
  node.index = rest;
  return node;
}

BlockId slot_address(const ForestLayout& layout, const NodeAddr& node, std::uint32_t slot) {
  return node_ordinal(layout, node) * layout.t + slot + 1;
}

std::vector<NodeAddr> bucket_path(const ForestLayout& layout, std::uint64_t leaf) {
  if (leaf >= layout.leaves()) throw ParameterError("leaf index out of range");
  std::vector<NodeAddr> path;
  path.reserve(layout.levels);
  const std::uint64_t tree = leaf / layout.L;
  const std::uint64_t local = leaf % layout.L;
  for (std::uint32_t h = 0; h < layout.levels; ++h) path.push_back({tree, h, local >> h});
  return path;
}

MappingFn MappingFn::generate() {
  ensure_sodium();
  Key a, b;
  crypto_shorthash_keygen(a.data());
  crypto_shorthash_keygen(b.data());
  return MappingFn(a, b);
}

MappingFn MappingFn::from_rng(ChaChaRng rng) {
  Key a, b;
  rng.fill(a.data(), a.size());
  rng.fill(b.data(), b.size());
  return MappingFn(a, b);
}

namespace {

std::uint64_t siphash(const MappingFn::Key& key, ByteView data) {
  static_assert(crypto_shorthash_BYTES == 8 && crypto_shorthash_KEYBYTES == 16);
  std::uint8_t out[8];
  crypto_shorthash(out, data.data(), data.size(), key.data());
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | out[i];
  return v;
}

ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> MappingFn::leaves(ByteView key,
                                                         std::uint64_t leaf_count) const {
  if (leaf_count == 0) throw ParameterError("leaf count is zero");
  ensure_sodium();
  return {siphash(k1_, key) % leaf_count, siphash(k2_, key) % leaf_count};
}

std::pair<std::uint64_t, std::uint64_t> MappingFn::leaves(std::string_view key,
                                                         std::uint64_t leaf_count) const {
  return leaves(as_bytes(key), leaf_count);
}

TagFn TagFn::generate() {
  ensure_sodium();
  Key k;
  randombytes_buf(k.data(), k.size());
  return TagFn(k);
}

TagFn TagFn::from_rng(ChaChaRng rng) {
  Key k;
  rng.fill(k.data(), k.size());
  return TagFn(k);
}

KeyTag TagFn::operator()(ByteView key) const {
  ensure_sodium();
  KeyTag tag;
  crypto_generichash(tag.data(), tag.size(), key.data(), key.size(), key_.data(), key_.size());
  if (tag == kEmptyTag) tag.back() = 1;
  return tag;
}

KeyTag TagFn::operator()(std::string_view key) const { return (*this)(as_bytes(key)); }

std::size_t TagHash::operator()(const KeyTag& tag) const {
  std::size_t h;
  std::memcpy(&h, tag.data(), sizeof(h));
  return h;
}

std::optional<NodeAddr> choose_node(const ForestLayout& layout, std::uint64_t leaf_a,
                                    std::uint64_t leaf_b,
                                    const std::function<bool(const NodeAddr&)>& has_room) {
  const std::uint64_t lo = std::min(leaf_a, leaf_b);
  const std::uint64_t hi = std::max(leaf_a, leaf_b);
  const auto path_lo = bucket_path(layout, lo);
  const auto path_hi = bucket_path(layout, hi);
  for (std::uint32_t h = 0; h < layout.levels; ++h) {
    if (has_room(path_lo[h])) return path_lo[h];
    if (has_room(path_hi[h])) return path_hi[h];
  }
  return std::nullopt;
}

Forest::Forest(const ForestLayout& layout)
    : layout_(layout),
      fill_(layout.node_count(), 0),
      slots_(layout.slot_count(), kEmptyTag),
      values_(layout.slot_count()) {}

Placement Forest::store(const KeyTag& tag, std::uint64_t leaf_a, std::uint64_t leaf_b,
                        Bytes block) {
  touches_ += 2 * layout_.levels;
  auto node = choose_node(layout_, leaf_a, leaf_b, [this](const NodeAddr& a) {
    return fill_[node_ordinal(layout_, a)] < layout_.t;
  });
  Placement placement;
  if (node) {
    const std::uint64_t ord = node_ordinal(layout_, *node);
    const std::uint64_t base = ord * layout_.t;
    std::uint32_t slot = 0;
    while (slots_[base + slot] != kEmptyTag) ++slot;
    slots_[base + slot] = tag;
    values_[base + slot] = std::move(block);
    ++fill_[ord];
    placement = {Placement::Kind::kNode, *node, slot};
  } else if (super_root_.size() < layout_.phi) {
    super_root_.emplace(tag, std::move(block));
    placement.kind = Placement::Kind::kSuperRoot;
  } else {
    return placement;  // kFull
  }
  ++stored_;
  return placement;
}

std::optional<Placement> Forest::lookup(const KeyTag& tag, std::uint64_t leaf_a,
                                        std::uint64_t leaf_b) const {
  touches_ += 2 * layout_.levels;
  std::optional<Placement> found;
  for (std::uint64_t leaf : {leaf_a, leaf_b}) {
    for (const NodeAddr& node : bucket_path(layout_, leaf)) {
      const std::uint64_t base = node_ordinal(layout_, node) * layout_.t;
      for (std::uint32_t s = 0; s < layout_.t; ++s) {
        if (slots_[base + s] == tag && !found) found = Placement{Placement::Kind::kNode, node, s};
      }
    }
  }
  if (!found && super_root_.contains(tag)) {
    found = Placement{Placement::Kind::kSuperRoot, {}, 0};
  }
  return found;
}

const Bytes* Forest::value(const KeyTag& tag, std::uint64_t leaf_a,
                           std::uint64_t leaf_b) const {
  auto where = lookup(tag, leaf_a, leaf_b);
  if (!where) return nullptr;
  if (where->kind == Placement::Kind::kSuperRoot) return &super_root_.at(tag);
  return &values_[node_ordinal(layout_, where->node) * layout_.t + where->slot];
}

std::uint32_t Forest::occupancy(const NodeAddr& node) const {
  return fill_[node_ordinal(layout_, node)];
}

std::uint64_t Forest::occupied_slots() const {
  std::uint64_t total = 0;
  for (auto f : fill_) total += f;
  return total;
}

std::vector<std::uint64_t> Forest::level_fill_histogram() const {
  std::vector<std::uint64_t> hist(layout_.levels, 0);
  for (std::uint64_t ord = 0; ord < fill_.size(); ++ord) {
    if (fill_[ord] == layout_.t) ++hist[node_at(layout_, ord).height];
  }
  return hist;
}

int Forest::max_height_used() const {
  int best = -1;
  for (std::uint64_t ord = 0; ord < fill_.size(); ++ord) {
    if (fill_[ord] > 0) best = std::max(best, static_cast<int>(node_at(layout_, ord).height));
  }
  return best;
}

long double beta(unsigned i, double n) {
  const long double e = std::exp(1.0L);
  const long double k = static_cast<long double>(i) + 2.0L;
  return (static_cast<long double>(n) / e) * std::pow(2.0L / 3.0L, std::exp2(k)) *
         std::pow(0.5L, 2.0L * k);
}

long double beta_recurrence(unsigned i, double n) {
  const long double e = std::exp(1.0L);
  const long double nn = n;
  long double b = nn / (81.0L * e);
  for (unsigned j = 0; j < i; ++j) b = (e / nn) * b * b * std::exp2(2.0L * (j + 1));
  return b;
}

std::optional<unsigned> i_star(double n, double phi) {
  std::optional<unsigned> best;
  for (unsigned i = 0; i < 64; ++i) {
    if (beta(i, n) >= static_cast<long double>(phi)) {
      best = i;
    } else {
      break;
    }
  }
  return best;
}

std::uint64_t two_choice_max_load(std::uint64_t balls, std::uint64_t bins, ChaChaRng& rng) {
  if (bins == 0) throw ParameterError("no bins");
  std::vector<std::uint64_t> load(bins, 0);
  std::uint64_t best = 0;
  for (std::uint64_t b = 0; b < balls; ++b) {
    std::uint64_t x = rng.below(bins), y = rng.below(bins);
    std::uint64_t pick = load[y] < load[x] ? y : x;
    best = std::max(best, ++load[pick]);
  }
  return best;
}

std::vector<SimulationRow> simulate(const ForestLayout& layout, std::uint64_t trials,
                                    std::uint64_t seed) {
  std::vector<SimulationRow> rows;
  ChaChaRng root(seed, "maptool");
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    ChaChaRng rng = root.derive(trial);
    MappingFn fn = MappingFn::from_rng(rng);
    Forest forest(layout);
    SimulationRow row;
    row.trial = trial;
    for (std::uint64_t key = 0; key < layout.n; ++key) {
      std::uint8_t raw[8];
      for (int b = 0; b < 8; ++b) raw[b] = static_cast<std::uint8_t>(key >> (8 * b));
      KeyTag tag{};
      std::memcpy(tag.data(), raw, 8);
      tag[15] = 1;
      auto [a, b] = fn.leaves(ByteView(raw, 8), layout.leaves());
      if (forest.store(tag, a, b).kind == Placement::Kind::kFull) row.full = true;
    }
    row.super_root_load = forest.super_root_load();
    row.max_height_used = forest.max_height_used();
    row.histogram = forest.level_fill_histogram();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dpstore::mapping
