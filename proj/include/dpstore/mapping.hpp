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

// Oblivious two-choice hashing over a forest of complete binary trees.
//
// The n buckets are the leaves of T trees with L leaves each. A key u maps to
// two leaves; its bucket is either leaf-to-root path, and it is stored in the
// lowest node with a free slot on either path. Keys that fit nowhere go to a
// client-side super root of capacity phi.
//
// Leaf indices here are 0-based in [0, leaves). Cell addresses are 1-based.

#ifndef DPSTORE_MAPPING_HPP_
#define DPSTORE_MAPPING_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpstore/common.hpp"
#include "dpstore/random.hpp"

namespace dpstore::mapping {

struct ForestLayout {
  std::uint64_t n = 0;       // requested capacity
  std::uint64_t L = 0;       // leaves per tree, a power of two
  std::uint64_t trees = 0;   // T
  std::uint32_t levels = 0;  // log2(L) + 1
  std::uint32_t t = 0;       // slots per node
  std::uint64_t phi = 0;     // super-root capacity

  // Explicit geometry, for toy forests. L must be a power of two.
  static ForestLayout make(std::uint64_t L, std::uint64_t trees, std::uint32_t t,
                           std::uint64_t phi);

  std::uint64_t leaves() const { return trees * L; }
  std::uint64_t nodes_per_tree() const { return 2 * L - 1; }
  std::uint64_t node_count() const { return trees * nodes_per_tree(); }
  std::uint64_t slot_count() const { return node_count() * t; }
  std::uint64_t nodes_at_height(std::uint32_t h) const { return L >> h; }
  // Slots on one leaf-to-root path.
  std::uint64_t bucket_slots() const { return std::uint64_t{t} * levels; }
};

// L = smallest power of two >= log2 n, T = ceil(n / L),
// phi = ceil(log2(n)^phi_exponent). Throws ParameterError for n < 16.
ForestLayout layout_for(std::uint64_t n, std::uint32_t t = 4, double phi_exponent = 1.5);

struct NodeAddr {
  std::uint64_t tree = 0;
  std::uint32_t height = 0;
  std::uint64_t index = 0;  // within its level, < L >> height

  friend auto operator<=>(const NodeAddr&, const NodeAddr&) = default;
};

// Dense 0-based node number: tree-major, then level by level from the leaves.
std::uint64_t node_ordinal(const ForestLayout& layout, const NodeAddr& node);
NodeAddr node_at(const ForestLayout& layout, std::uint64_t ordinal);

// 1-based server cell holding `slot` of `node`.
BlockId slot_address(const ForestLayout& layout, const NodeAddr& node, std::uint32_t slot);

// Nodes from leaf (height 0) up to the tree root.
std::vector<NodeAddr> bucket_path(const ForestLayout& layout, std::uint64_t leaf);

using KeyTag = std::array<std::uint8_t, 16>;
inline constexpr KeyTag kEmptyTag{};

// Pi(u) = (F(k1, u) mod leaves, F(k2, u) mod leaves), F = SipHash-2-4.
class MappingFn {
 public:
  using Key = std::array<std::uint8_t, 16>;

  MappingFn(const Key& k1, const Key& k2) : k1_(k1), k2_(k2) {}
  static MappingFn generate();
  static MappingFn from_rng(ChaChaRng rng);

  std::pair<std::uint64_t, std::uint64_t> leaves(ByteView key, std::uint64_t leaf_count) const;
  std::pair<std::uint64_t, std::uint64_t> leaves(std::string_view key,
                                                 std::uint64_t leaf_count) const;

  const Key& key1() const { return k1_; }
  const Key& key2() const { return k2_; }

 private:
  Key k1_;
  Key k2_;
};

// 128-bit keyed BLAKE2b tag of a key. Never returns kEmptyTag.
class TagFn {
 public:
  using Key = std::array<std::uint8_t, 32>;

  explicit TagFn(const Key& key) : key_(key) {}
  static TagFn generate();
  static TagFn from_rng(ChaChaRng rng);

  KeyTag operator()(ByteView key) const;
  KeyTag operator()(std::string_view key) const;

  const Key& key() const { return key_; }

 private:
  Key key_;
};

struct TagHash {
  std::size_t operator()(const KeyTag& tag) const;
};

// The storing rule shared by the in-memory forest and the key-value store:
// lowest height with room across both paths, ties to the lower leaf index.
// nullopt means both paths are full.
std::optional<NodeAddr> choose_node(const ForestLayout& layout, std::uint64_t leaf_a,
                                    std::uint64_t leaf_b,
                                    const std::function<bool(const NodeAddr&)>& has_room);

struct Placement {
  enum class Kind { kNode, kSuperRoot, kFull };
  Kind kind = Kind::kFull;
  NodeAddr node;
  std::uint32_t slot = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

// In-memory forest plus super root, for simulation and as a reference model.
class Forest {
 public:
  explicit Forest(const ForestLayout& layout);

  const ForestLayout& layout() const { return layout_; }

  // Precondition: tag not stored. kFull leaves the forest unchanged.
  Placement store(const KeyTag& tag, std::uint64_t leaf_a, std::uint64_t leaf_b,
                  Bytes block = {});
  // Scans both paths and the super root with no early exit.
  std::optional<Placement> lookup(const KeyTag& tag, std::uint64_t leaf_a,
                                  std::uint64_t leaf_b) const;
  const Bytes* value(const KeyTag& tag, std::uint64_t leaf_a, std::uint64_t leaf_b) const;

  std::uint32_t occupancy(const NodeAddr& node) const;
  std::uint64_t super_root_load() const { return super_root_.size(); }
  std::uint64_t stored() const { return stored_; }
  std::uint64_t occupied_slots() const;
  // Per height, nodes with all t slots taken.
  std::vector<std::uint64_t> level_fill_histogram() const;
  // -1 when the forest is empty.
  int max_height_used() const;

  // Nodes read by store() and lookup() so far.
  std::uint64_t node_touches() const { return touches_; }

 private:
  ForestLayout layout_;
  std::vector<std::uint8_t> fill_;  // per node
  std::vector<KeyTag> slots_;       // node_count * t
  std::vector<Bytes> values_;
  std::unordered_map<KeyTag, Bytes, TagHash> super_root_;
  std::uint64_t stored_ = 0;
  mutable std::uint64_t touches_ = 0;
};

// beta_i = (n/e) (2/3)^(2^(i+2)) (1/2)^(2(i+2)). Long double keeps beta_10
// (about 1e-722 n) in range.
long double beta(unsigned i, double n);
// beta_0 = n / (81 e), beta_{i+1} = (e/n) beta_i^2 2^(2(i+1)).
long double beta_recurrence(unsigned i, double n);
// Largest i with beta_i >= phi; nullopt if beta_0 < phi.
std::optional<unsigned> i_star(double n, double phi);

// Classic two-choice allocation of `balls` balls into `bins` bins; returns the
// maximum bin load.
std::uint64_t two_choice_max_load(std::uint64_t balls, std::uint64_t bins, ChaChaRng& rng);

struct SimulationRow {
  std::uint64_t trial = 0;
  std::uint64_t super_root_load = 0;
  int max_height_used = -1;
  bool full = false;
  std::vector<std::uint64_t> histogram;
};

// Inserts layout.n fresh random keys into an empty forest; one row per trial.
std::vector<SimulationRow> simulate(const ForestLayout& layout, std::uint64_t trials,
                                    std::uint64_t seed);

}  // namespace dpstore::mapping

#endif  // DPSTORE_MAPPING_HPP_
