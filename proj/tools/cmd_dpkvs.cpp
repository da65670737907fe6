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

// Values are stored as a 4-byte big-endian length followed by the bytes,
// zero padded to the block size. Client state (bucket stash, freshness map,
// super root) persists as JSON between invocations.

#include <cstdio>
#include <filesystem>

#include "cli.hpp"
#include "dpstore/dpkvs.hpp"

namespace dpstore::cli {

namespace {

constexpr std::size_t kLengthPrefix = 4;

struct Backend {
  std::string store_dir;
  std::string server;
  std::string state;
  std::string key_file;

  std::string state_path() const {
    if (!state.empty()) return state;
    if (!store_dir.empty()) return store_dir + "/state.json";
    return "dpkvs.json";
  }
  std::string key_path() const {
    if (!key_file.empty()) return key_file;
    if (!store_dir.empty()) return store_dir + "/keys.json";
    throw ParameterError("--key-file is required with --server");
  }
};

struct InitOptions {
  std::uint64_t n = 0;
  std::uint32_t t = 4;
  double phi_exponent = 1.5;
  std::size_t block_size = 256;
  std::uint64_t threshold = 0;
  bool uniform_shape = false;
};

struct KeyValueOptions {
  std::string key;
  std::string key_hex;
  std::string value_hex;
  std::string value_file;
  std::string out;
};

struct Keys {
  blockstore::CipherKey cipher;
  mapping::MappingFn::Key prf1{};
  mapping::MappingFn::Key prf2{};
  mapping::TagFn::Key tag{};
};

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(const std::string& hex, const char* what) {
  Bytes raw = from_hex(hex);
  if (raw.size() != N) throw ParameterError(std::string("key field ") + what + " has wrong length");
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

Keys generate_keys() {
  Keys k;
  k.cipher = blockstore::CipherKey::generate();
  auto rng = ChaChaRng::from_os();
  rng.fill(k.prf1.data(), k.prf1.size());
  rng.fill(k.prf2.data(), k.prf2.size());
  rng.fill(k.tag.data(), k.tag.size());
  return k;
}

void save_keys(const std::string& path, const Keys& k) {
  write_json(path, Json{{"cipher", to_hex(k.cipher.bytes())},
                        {"prf1", to_hex(k.prf1)},
                        {"prf2", to_hex(k.prf2)},
                        {"tag", to_hex(k.tag)}});
}

Keys load_keys(const std::string& path) {
  const Json j = read_json(path);
  Keys k;
  k.cipher = blockstore::CipherKey::from_bytes(from_hex(j.at("cipher").get<std::string>()));
  k.prf1 = fixed_from_hex<16>(j.at("prf1").get<std::string>(), "prf1");
  k.prf2 = fixed_from_hex<16>(j.at("prf2").get<std::string>(), "prf2");
  k.tag = fixed_from_hex<32>(j.at("tag").get<std::string>(), "tag");
  return k;
}

Json params_to_json(const InitOptions& o, const dpkvs::KvsParams& p) {
  return {{"n", o.n},
          {"t", o.t},
          {"phi_exponent", o.phi_exponent},
          {"block_size", p.block_size},
          {"stash_num", p.stash_num},
          {"stash_den", p.stash_den},
          {"uniform_shape", p.uniform_shape}};
}

dpkvs::KvsParams params_from_json(const Json& j) {
  auto p = dpkvs::KvsParams::for_capacity(j.at("n").get<std::uint64_t>(),
                                          j.at("block_size").get<std::size_t>(),
                                          j.at("t").get<std::uint32_t>(),
                                          j.at("phi_exponent").get<double>());
  p.stash_num = j.at("stash_num").get<std::uint64_t>();
  p.stash_den = j.at("stash_den").get<std::uint64_t>();
  p.uniform_shape = j.at("uniform_shape").get<bool>();
  p.validate();
  return p;
}

Json slots_to_json(const std::vector<dpkvs::Slot>& slots) {
  Json out = Json::array();
  for (const auto& s : slots) {
    if (s.empty()) {
      out.push_back(nullptr);
    } else {
      out.push_back({{"tag", to_hex(s.tag)}, {"block", to_hex(s.block)}});
    }
  }
  return out;
}

std::vector<dpkvs::Slot> slots_from_json(const Json& j, std::size_t block_size) {
  std::vector<dpkvs::Slot> out;
  for (const auto& s : j) {
    dpkvs::Slot slot;
    if (s.is_null()) {
      slot.block.assign(block_size, 0);
    } else {
      slot.tag = fixed_from_hex<16>(s.at("tag").get<std::string>(), "slot tag");
      slot.block = from_hex(s.at("block").get<std::string>());
    }
    out.push_back(std::move(slot));
  }
  return out;
}

struct Session {
  Backend backend;
  Json state;
  dpkvs::KvsParams params;
  blockstore::AeadCipher cipher;
  std::unique_ptr<blockstore::BlockStore> store;
  dpkvs::KvsClient client;

  Session(const Backend& b, Json s, const Keys& keys)
      : backend(b),
        state(std::move(s)),
        params(params_from_json(state.at("params"))),
        cipher(keys.cipher),
        store(open_backend(b, params, cipher)),
        client(params, *store, cipher, mapping::MappingFn(keys.prf1, keys.prf2),
               mapping::TagFn(keys.tag), dpram::RamStreams::from_os(), ChaChaRng::from_os()) {}

  static std::unique_ptr<blockstore::BlockStore> open_backend(const Backend& b,
                                                              const dpkvs::KvsParams& p,
                                                              const blockstore::Cipher& c) {
    std::optional<std::string> file;
    std::optional<std::string> server;
    if (!b.server.empty()) server = b.server;
    if (!b.store_dir.empty()) file = b.store_dir + "/cells.dat";
    return open_store(server, file, p.cells(), c.ciphertext_size(p.slot_size()));
  }

  void restore() {
    std::set<BlockId> stash;
    for (const auto& b : state.at("stash")) stash.insert(b.get<BlockId>());
    std::unordered_map<std::uint64_t, dpkvs::BucketRam::FreshNode> fresh;
    for (const auto& [ordinal, node] : state.at("fresh").items()) {
      dpkvs::BucketRam::FreshNode f;
      f.refs = node.at("refs").get<std::uint32_t>();
      f.slots = slots_from_json(node.at("slots"), params.block_size);
      fresh.emplace(std::stoull(ordinal), std::move(f));
    }
    client.ram().restore(std::move(stash), std::move(fresh));
    std::unordered_map<mapping::KeyTag, Bytes, mapping::TagHash> root;
    for (const auto& [tag, block] : state.at("super_root").items()) {
      root.emplace(fixed_from_hex<16>(tag, "super root tag"),
                   from_hex(block.get<std::string>()));
    }
    client.restore_super_root(std::move(root));
  }

  void save() {
    Json stash = Json::array();
    for (BlockId b : client.ram().stash()) stash.push_back(b);
    Json fresh = Json::object();
    for (const auto& [ordinal, node] : client.ram().fresh()) {
      fresh[std::to_string(ordinal)] = {{"refs", node.refs}, {"slots", slots_to_json(node.slots)}};
    }
    Json root = Json::object();
    for (const auto& [tag, block] : client.super_root()) root[to_hex(tag)] = to_hex(block);
    state["stash"] = std::move(stash);
    state["fresh"] = std::move(fresh);
    state["super_root"] = std::move(root);
    write_json(backend.state_path(), state);
  }
};

void check_backend(const Backend& b) {
  if (b.store_dir.empty() == b.server.empty()) {
    throw ParameterError("pass exactly one of --store DIR and --server HOST:PORT");
  }
}

std::unique_ptr<Session> open_session(const Backend& b) {
  check_backend(b);
  auto s = std::make_unique<Session>(b, read_json(b.state_path()), load_keys(b.key_path()));
  s->restore();
  return s;
}

Bytes key_bytes(const KeyValueOptions& o) {
  if (!o.key_hex.empty()) return from_hex(o.key_hex);
  if (o.key.empty()) throw ParameterError("pass --key or --key-hex");
  return to_bytes(o.key);
}

Bytes encode_value(const Bytes& value, std::size_t block_size) {
  if (value.size() + kLengthPrefix > block_size) {
    throw ParameterError("value of " + std::to_string(value.size()) + " bytes exceeds the " +
                         std::to_string(block_size - kLengthPrefix) + "-byte limit");
  }
  Bytes block(block_size, 0);
  const auto len = static_cast<std::uint32_t>(value.size());
  for (std::size_t i = 0; i < kLengthPrefix; ++i) {
    block[i] = static_cast<std::uint8_t>(len >> (8 * (kLengthPrefix - 1 - i)));
  }
  std::copy(value.begin(), value.end(), block.begin() + kLengthPrefix);
  return block;
}

Bytes decode_value(const Bytes& block) {
  std::uint32_t len = 0;
  for (std::size_t i = 0; i < kLengthPrefix; ++i) len = (len << 8) | block.at(i);
  if (len > block.size() - kLengthPrefix) throw IntegrityError("stored value length is corrupt");
  return Bytes(block.begin() + kLengthPrefix, block.begin() + kLengthPrefix + len);
}

void run_init(const Backend& b, const InitOptions& o) {
  check_backend(b);
  auto params = dpkvs::KvsParams::for_capacity(o.n, o.block_size, o.t, o.phi_exponent);
  if (o.block_size <= kLengthPrefix) throw ParameterError("block size must exceed 4 bytes");
  if (o.threshold) params.stash_num = o.threshold;
  params.uniform_shape = o.uniform_shape;
  params.validate();

  if (!b.store_dir.empty()) std::filesystem::create_directories(b.store_dir);
  const auto key_path = b.key_path();
  Keys keys;
  if (file_exists(key_path)) {
    keys = load_keys(key_path);
  } else {
    keys = generate_keys();
    save_keys(key_path, keys);
  }
  Json state = {{"params", params_to_json(o, params)},
                {"stash", Json::array()},
                {"fresh", Json::object()},
                {"super_root", Json::object()}};
  Session s(b, std::move(state), keys);
  s.client.setup();
  s.save();
  std::fprintf(stderr, "initialized %llu buckets, %llu cells\n",
               static_cast<unsigned long long>(params.buckets()),
               static_cast<unsigned long long>(params.cells()));
}

void run_put(const Backend& b, const KeyValueOptions& o) {
  auto s = open_session(b);
  Bytes value;
  if (!o.value_file.empty()) {
    value = read_file(o.value_file);
  } else {
    value = from_hex(o.value_hex);
  }
  s->client.put(ByteView(key_bytes(o)), encode_value(value, s->params.block_size));
  s->save();
}

void run_get(const Backend& b, const KeyValueOptions& o) {
  auto s = open_session(b);
  auto block = s->client.get(ByteView(key_bytes(o)));
  s->save();
  if (!block) {
    std::fprintf(stderr, "absent\n");
    exit_with(kExitAbsent);
  }
  Bytes value = decode_value(*block);
  if (o.out.empty()) {
    std::printf("%s\n", to_hex(value).c_str());
  } else {
    write_file(o.out, value);
  }
}

Json shape_json(const dpkvs::KvsParams& p, std::size_t cell_size) {
  const auto& l = p.layout;
  return {{"leaves_per_tree", l.L},
          {"trees", l.trees},
          {"levels", l.levels},
          {"t", l.t},
          {"phi", l.phi},
          {"buckets", p.buckets()},
          {"bucket_size", p.bucket_size()},
          {"cells", p.cells()},
          {"cell_size", cell_size},
          {"serve_block_size", p.slot_size()},
          {"stash_p", std::to_string(p.stash_num) + "/" + std::to_string(p.stash_den)}};
}

void run_stats(const Backend& b) {
  auto s = open_session(b);
  const auto st = s->client.stats();
  Json out = {{"stash_buckets", st.stash_buckets},
              {"fresh_nodes", st.fresh_nodes},
              {"super_root_load", st.super_root_load},
              {"phi", st.phi},
              {"bucket_size", st.bucket_size},
              {"blocks_per_get", st.blocks_per_get},
              {"blocks_per_put", st.blocks_per_put},
              {"epsilon_multiplier_get", st.epsilon_multiplier_get},
              {"epsilon_multiplier_put", st.epsilon_multiplier_put},
              {"uniform_shape", s->params.uniform_shape}};
  std::printf("%s\n", out.dump(2).c_str());
}

void run_shape(const InitOptions& o) {
  auto params = dpkvs::KvsParams::for_capacity(o.n, o.block_size, o.t, o.phi_exponent);
  const std::size_t cell_size = params.slot_size() + blockstore::AeadCipher::kNonceSize +
                                blockstore::AeadCipher::kTagSize;
  std::printf("%s\n", shape_json(params, cell_size).dump(2).c_str());
}

void add_backend(CLI::App* cmd, const std::shared_ptr<Backend>& b) {
  cmd->add_option("--store", b->store_dir, "Local store directory (cells, state, keys)");
  cmd->add_option("--server", b->server, "HOST:PORT of a block server");
  cmd->add_option("--state", b->state, "Client state file");
  cmd->add_option("--key-file", b->key_file, "Key file (JSON)");
}

void add_key_options(CLI::App* cmd, const std::shared_ptr<KeyValueOptions>& kv) {
  auto* key = cmd->add_option("--key", kv->key, "Key as text");
  cmd->add_option("--key-hex", kv->key_hex, "Key as hex")->excludes(key);
}

void add_layout_options(CLI::App* cmd, const std::shared_ptr<InitOptions>& o) {
  cmd->add_option("--n", o->n, "Capacity in keys (at least 16)")->required();
  cmd->add_option("--t", o->t, "Slots per node")->capture_default_str()->check(CLI::Range(1, 255));
  cmd->add_option("--phi-exp", o->phi_exponent, "Super root holds ceil(log2(n)^P) keys")
      ->capture_default_str();
  cmd->add_option("--block-size", o->block_size, "Value block size in bytes")
      ->capture_default_str();
}

}  // namespace

void add_dpkvs(CLI::App& app) {
  auto* cmd = app.add_subcommand("dpkvs", "Private key-value store");
  cmd->require_subcommand(1);
  auto backend = std::make_shared<Backend>();

  auto init = std::make_shared<InitOptions>();
  auto* i = cmd->add_subcommand("init", "Create an empty store and client state");
  add_backend(i, backend);
  add_layout_options(i, init);
  i->add_option("--C", init->threshold, "Bucket stash threshold; p = C / buckets");
  i->add_flag("--uniform-shape", init->uniform_shape,
              "Pad gets with two fake updates so gets and puts look alike");
  i->callback([backend, init] { run_init(*backend, *init); });

  auto put = std::make_shared<KeyValueOptions>();
  auto* p = cmd->add_subcommand("put", "Insert or update a key");
  add_backend(p, backend);
  add_key_options(p, put);
  auto* value = p->add_option("--value", put->value_hex, "Value as hex");
  p->add_option("--value-file", put->value_file, "Value from a file")->excludes(value);
  p->callback([backend, put] {
    if (put->value_hex.empty() && put->value_file.empty()) {
      throw ParameterError("pass --value or --value-file");
    }
    run_put(*backend, *put);
  });

  auto get = std::make_shared<KeyValueOptions>();
  auto* g = cmd->add_subcommand("get", "Look up a key; exit code 3 when absent");
  add_backend(g, backend);
  add_key_options(g, get);
  g->add_option("--out", get->out, "Write the value here instead of printing hex");
  g->callback([backend, get] { run_get(*backend, *get); });

  auto* st = cmd->add_subcommand("stats", "Stash, super root and per-operation cost as JSON");
  add_backend(st, backend);
  st->callback([backend] { run_stats(*backend); });

  auto shape = std::make_shared<InitOptions>();
  auto* sh = cmd->add_subcommand("shape", "Print the forest geometry and server sizing");
  add_layout_options(sh, shape);
  sh->callback([shape] { run_shape(*shape); });
}

}  // namespace dpstore::cli
