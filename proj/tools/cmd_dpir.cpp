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

#include <cstdio>
#include <fstream>
#include <iostream>

#include "cli.hpp"
#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/dpir.hpp"

namespace dpstore::cli {

namespace {

struct InitOptions {
  std::uint64_t n = 0;
  std::size_t block_size = 256;
  std::string server;
  std::string key_file;
  std::string data_file;
};

struct GetOptions {
  std::uint64_t n = 0;
  std::size_t block_size = 256;
  std::uint64_t index = 0;
  std::string batch;
  std::string alpha = "0.5";
  double epsilon = 0.0;
  std::uint64_t k = 0;
  bool honest_error = true;
  std::string server;
  std::string key_file;
  std::string out;
};

void run_init(const InitOptions& o) {
  auto key = load_or_create_key(o.key_file);
  blockstore::AeadCipher cipher(key);
  auto store = open_store(o.server, std::nullopt, o.n, cipher.ciphertext_size(o.block_size));
  auto blocks = initial_blocks(o.n, o.block_size, o.data_file);
  for (std::uint64_t i = 0; i < o.n; ++i) store->upload(i + 1, cipher.encrypt(blocks[i]));
  std::fprintf(stderr, "uploaded %llu blocks\n", static_cast<unsigned long long>(o.n));
}

dpir::DpIrParams make_params(const GetOptions& o) {
  const double alpha = to_double(parse_rational(o.alpha));
  if (o.k != 0 && o.epsilon > 0.0) throw ParameterError("pass one of --k and --epsilon");
  auto params = o.k != 0 ? dpir::DpIrParams::with_k(o.n, alpha, o.k)
                         : dpir::DpIrParams::for_budget(o.n, alpha, o.epsilon);
  params.answer_on_full_download = !o.honest_error;
  return params;
}

std::vector<BlockId> batch_indices(const std::string& source) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (source != "-") {
    file.open(source);
    if (!file) throw IoError("cannot read " + source);
    in = &file;
  }
  std::vector<BlockId> out;
  std::string line;
  while (std::getline(*in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(std::stoull(line));
    } catch (const std::exception&) {
      throw ParameterError("bad index line '" + line + "'");
    }
  }
  return out;
}

void run_get(const GetOptions& o) {
  const auto params = make_params(o);
  blockstore::AeadCipher cipher(blockstore::CipherKey::load(o.key_file));
  auto store = open_store(o.server, std::nullopt, o.n, cipher.ciphertext_size(o.block_size));
  auto rng = ChaChaRng::from_os();

  if (o.batch.empty()) {
    if (o.index == 0) throw ParameterError("pass --index or --batch");
    auto result = dpir::ir_query(params, o.index, *store, cipher, rng);
    std::printf("%llu,%s,%llu\n", static_cast<unsigned long long>(o.index),
                result.hit() ? "hit" : "miss", static_cast<unsigned long long>(params.k));
    if (result.hit() && !o.out.empty()) write_file(o.out, *result.block);
    if (!result.hit()) exit_with(kExitAbsent);
    return;
  }
  for (BlockId i : batch_indices(o.batch)) {
    auto result = dpir::ir_query(params, i, *store, cipher, rng);
    std::printf("%llu,%s,%llu\n", static_cast<unsigned long long>(i),
                result.hit() ? "hit" : "miss", static_cast<unsigned long long>(params.k));
  }
}

}  // namespace

void add_dpir(CLI::App& app) {
  auto* cmd = app.add_subcommand("dpir", "Stateless private retrieval");
  cmd->require_subcommand(1);

  auto init = std::make_shared<InitOptions>();
  auto* i = cmd->add_subcommand("init", "Encrypt and upload n blocks");
  i->add_option("--n", init->n, "Number of blocks")->required()->check(CLI::PositiveNumber);
  i->add_option("--block-size", init->block_size, "Block size in bytes")->capture_default_str();
  i->add_option("--server", init->server, "HOST:PORT")->required();
  i->add_option("--key-file", init->key_file, "Cipher key; generated when missing")->required();
  i->add_option("--data-file", init->data_file, "Raw data split into blocks");
  i->callback([init] { run_init(*init); });

  auto get = std::make_shared<GetOptions>();
  auto* g = cmd->add_subcommand("get", "Retrieve one block, or a batch of indices");
  auto* index = g->add_option("--index", get->index, "1-based block index");
  g->add_option("--batch", get->batch, "File of indices, one per line; - for stdin")
      ->excludes(index);
  g->add_option("--n", get->n, "Number of blocks")->required()->check(CLI::PositiveNumber);
  g->add_option("--block-size", get->block_size, "Block size in bytes")->capture_default_str();
  g->add_option("--alpha", get->alpha, "Miss probability, decimal or NUM/DEN")
      ->capture_default_str();
  auto* eps = g->add_option("--epsilon", get->epsilon, "Privacy budget; sets K");
  g->add_option("--k", get->k, "Blocks per query, overriding --epsilon")->excludes(eps);
  g->add_flag("--honest-error,!--no-honest-error", get->honest_error,
              "Return a miss in the alpha branch even when K = n (default on)");
  g->add_option("--server", get->server, "HOST:PORT")->required();
  g->add_option("--key-file", get->key_file, "Cipher key")->required();
  g->add_option("--out", get->out, "Write the retrieved block here");
  g->callback([get] { run_get(*get); });
}

}  // namespace dpstore::cli
