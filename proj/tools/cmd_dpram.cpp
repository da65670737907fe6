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

// Client state lives in a JSON file between invocations: parameters, the
// backend, the stash and the audit sequence number.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "dpstore/dpram.hpp"

namespace dpstore::cli {

namespace {

struct Common {
  std::string state = "dpram.json";
};

struct InitOptions {
  std::uint64_t n = 0;
  std::uint64_t threshold = 0;
  std::size_t block_size = 256;
  std::string server;
  std::string key_file;
  std::string data_file;
  bool plaintext_readonly = false;
  std::string audit;
};

struct QueryOptions {
  BlockId index = 0;
  std::string data_file;
  std::string out;
};

// An open session: backend, cipher and client restored from the state file.
struct Session {
  Json state;
  std::unique_ptr<blockstore::Cipher> cipher;
  std::unique_ptr<blockstore::BlockStore> store;
  std::unique_ptr<dpram::RamClient> client;
};

dpram::RamParams params_from(const Json& s) {
  dpram::RamParams p;
  p.n = s.at("n").get<std::uint64_t>();
  p.stash_num = s.at("stash_num").get<std::uint64_t>();
  p.stash_den = s.at("stash_den").get<std::uint64_t>();
  p.block_size = s.at("block_size").get<std::size_t>();
  return p;
}

std::unique_ptr<blockstore::Cipher> make_cipher(const Json& s, bool create_key) {
  if (s.at("plaintext_readonly").get<bool>()) {
    return std::make_unique<blockstore::TransparentCipher>();
  }
  const auto path = s.at("key_file").get<std::string>();
  return std::make_unique<blockstore::AeadCipher>(
      create_key ? load_or_create_key(path) : blockstore::CipherKey::load(path));
}

Session open_session(Json state, bool create_key) {
  Session s;
  s.state = std::move(state);
  const auto params = params_from(s.state);
  s.cipher = make_cipher(s.state, create_key);
  s.store = open_store(s.state.at("server").get<std::string>(), std::nullopt, params.n,
                       s.cipher->ciphertext_size(params.block_size));
  s.client = std::make_unique<dpram::RamClient>(params, *s.store, *s.cipher,
                                                dpram::RamStreams::from_os());
  s.client->set_read_only(s.state.at("plaintext_readonly").get<bool>());
  s.client->enable_audit_log(!s.state.at("audit_file").get<std::string>().empty());
  return s;
}

void save_stash(Session& s) {
  Json stash = Json::object();
  for (const auto& [i, block] : s.client->stash()) stash[std::to_string(i)] = to_hex(block);
  s.state["stash"] = std::move(stash);
}

void restore_stash(Session& s) {
  std::unordered_map<BlockId, Bytes> stash;
  for (const auto& [i, hex] : s.state.at("stash").items()) {
    stash.emplace(std::stoull(i), from_hex(hex.get<std::string>()));
  }
  s.client->restore_stash(std::move(stash));
}

// Appends this session's traces, renumbered after the ones already logged.
void flush_audit(Session& s) {
  const auto path = s.state.at("audit_file").get<std::string>();
  const auto& log = s.client->audit_log();
  if (path.empty() || log.empty()) return;
  const auto offset = s.state.at("seq").get<std::uint64_t>();
  std::vector<dpram::AuditRecord> records(log.begin(), log.end());
  for (auto& r : records) r.seq += offset;
  std::ostringstream csv;
  dpram::write_audit_csv(csv, records);
  std::string text = csv.str();
  const bool fresh = !file_exists(path) || read_file(path).empty();
  if (!fresh) text.erase(0, text.find('\n') + 1);
  std::ofstream(path, std::ios::app) << text;
  s.state["seq"] = offset + records.size();
}

void finish(Session& s, const std::string& state_path) {
  save_stash(s);
  flush_audit(s);
  write_json(state_path, s.state);
}

void run_init(const Common& c, const InitOptions& o) {
  const auto threshold = o.threshold ? o.threshold : dpram::RamParams::default_threshold(o.n);
  const auto params = dpram::RamParams::with_threshold(o.n, threshold, o.block_size);
  if (auto warning = params.threshold_warning()) {
    std::fprintf(stderr, "warning: %s\n", warning->c_str());
  }
  if (!o.plaintext_readonly && o.key_file.empty()) {
    throw ParameterError("--key-file is required unless --plaintext-readonly is set");
  }
  Json state = {
      {"n", params.n},
      {"stash_num", params.stash_num},
      {"stash_den", params.stash_den},
      {"block_size", params.block_size},
      {"server", o.server},
      {"key_file", o.key_file},
      {"plaintext_readonly", o.plaintext_readonly},
      {"audit_file", o.audit},
      {"seq", 0},
      {"stash", Json::object()},
  };
  auto s = open_session(std::move(state), true);
  s.client->setup(initial_blocks(o.n, o.block_size, o.data_file));
  finish(s, c.state);
  std::fprintf(stderr, "initialized n=%llu C=%llu, stash holds %zu blocks\n",
               static_cast<unsigned long long>(params.n),
               static_cast<unsigned long long>(threshold), s.client->stash_size());
}

void run_read(const Common& c, const QueryOptions& o) {
  auto s = open_session(read_json(c.state), false);
  restore_stash(s);
  Bytes block = s.client->read(o.index);
  finish(s, c.state);
  if (o.out.empty()) {
    std::printf("%s\n", to_hex(block).c_str());
  } else {
    write_file(o.out, block);
  }
}

void run_write(const Common& c, const QueryOptions& o) {
  auto s = open_session(read_json(c.state), false);
  restore_stash(s);
  const auto block_size = s.client->params().block_size;
  Bytes data = read_file(o.data_file);
  if (data.size() > block_size) {
    throw ParameterError("data file holds " + std::to_string(data.size()) +
                         " bytes, blocks hold " + std::to_string(block_size));
  }
  data.resize(block_size, 0);
  s.client->write(o.index, std::move(data));
  finish(s, c.state);
}

// The last `limit` data rows of the audit CSV.
Json recent_traces(const std::string& path, std::size_t limit) {
  Json rows = Json::array();
  if (path.empty() || !file_exists(path)) return rows;
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  std::getline(in, line);  // header
  while (std::getline(in, line)) lines.push_back(line);
  const std::size_t from = lines.size() > limit ? lines.size() - limit : 0;
  for (std::size_t i = from; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string seq, index, op, d, o;
    std::getline(ss, seq, ',');
    std::getline(ss, index, ',');
    std::getline(ss, op, ',');
    std::getline(ss, d, ',');
    std::getline(ss, o, ',');
    rows.push_back({{"seq", std::stoull(seq)},
                    {"index", std::stoull(index)},
                    {"op", op},
                    {"d", std::stoull(d)},
                    {"o", std::stoull(o)}});
  }
  return rows;
}

void run_stats(const Common& c, std::size_t recent) {
  const Json state = read_json(c.state);
  const auto params = params_from(state);
  const auto audit = state.at("audit_file").get<std::string>();
  Json out = {
      {"n", params.n},
      {"p", to_string(params.p())},
      {"expected_stash", params.expected_stash()},
      {"stash_size", state.at("stash").size()},
      {"block_size", params.block_size},
      {"blocks_per_query", 3},
      {"queries", state.at("seq")},
      {"plaintext_readonly", state.at("plaintext_readonly")},
  };
  if (!audit.empty()) {
    out["audit_file"] = audit;
    out["recent_traces"] = recent_traces(audit, recent);
  }
  std::printf("%s\n", out.dump(2).c_str());
}

}  // namespace

void add_dpram(CLI::App& app) {
  auto common = std::make_shared<Common>();
  auto* cmd = app.add_subcommand("dpram", "Stateful private RAM with a client stash");
  cmd->require_subcommand(1);
  cmd->add_option("--state", common->state, "Client state file")->capture_default_str();

  auto init = std::make_shared<InitOptions>();
  auto* i = cmd->add_subcommand("init", "Upload n blocks and draw the initial stash");
  i->add_option("--n", init->n, "Number of blocks")->required()->check(CLI::Range(2ull, ~0ull));
  i->add_option("--C", init->threshold, "Stash threshold; p = C/n (default ceil(log2(n)^2))");
  i->add_option("--block-size", init->block_size, "Block size in bytes")->capture_default_str();
  i->add_option("--server", init->server, "HOST:PORT")->required();
  i->add_option("--key-file", init->key_file, "Cipher key; generated when missing");
  i->add_option("--data-file", init->data_file, "Raw data split into blocks");
  i->add_flag("--plaintext-readonly", init->plaintext_readonly,
              "Store blocks unencrypted and refuse writes");
  i->add_option("--audit", init->audit, "Append every query's (d, o) trace to this CSV");
  i->callback([common, init] { run_init(*common, *init); });

  auto read = std::make_shared<QueryOptions>();
  auto* r = cmd->add_subcommand("read", "Read one block");
  r->add_option("--index", read->index, "1-based block index")->required();
  r->add_option("--out", read->out, "Write the block here instead of printing hex");
  r->callback([common, read] { run_read(*common, *read); });

  auto write = std::make_shared<QueryOptions>();
  auto* w = cmd->add_subcommand("write", "Overwrite one block");
  w->add_option("--index", write->index, "1-based block index")->required();
  w->add_option("--data-file", write->data_file, "New contents, zero padded")->required();
  w->callback([common, write] { run_write(*common, *write); });

  auto recent = std::make_shared<std::size_t>(10);
  auto* st = cmd->add_subcommand("stats", "Print stash size and recent traces as JSON");
  st->add_option("--recent", *recent, "Audit rows to show")->capture_default_str();
  st->callback([common, recent] { run_stats(*common, *recent); });
}

}  // namespace dpstore::cli
