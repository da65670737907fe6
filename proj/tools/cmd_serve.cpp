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

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <fstream>

#include "cli.hpp"
#include "dpstore/blockstore/cipher.hpp"

namespace dpstore::cli {

namespace {

struct ServeOptions {
  std::uint64_t cells = 0;
  std::size_t block_size = 0;
  std::size_t cell_size = 0;  // 0: block size plus AEAD overhead
  std::string listen;
  std::string backing;
  std::string port_file;
};

void run_serve(const ServeOptions& o) {
  const std::size_t cell_size =
      o.cell_size ? o.cell_size
                  : o.block_size + blockstore::AeadCipher::kNonceSize +
                        blockstore::AeadCipher::kTagSize;
  std::unique_ptr<blockstore::BlockStore> store;
  if (o.backing.empty()) {
    store = std::make_unique<blockstore::MemoryStore>(o.cells, cell_size);
  } else {
    store = std::make_unique<blockstore::FileStore>(o.backing, o.cells, cell_size);
  }

  // Block the signals before the server spawns threads so they inherit the
  // mask and only sigwait below sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  blockstore::BlockServer server(*store, blockstore::Endpoint::parse(o.listen));
  server.start();
  if (!o.port_file.empty()) {
    std::ofstream(o.port_file) << server.port() << '\n';
  }
  std::fprintf(stderr, "serving %llu cells of %zu bytes on port %u\n",
               static_cast<unsigned long long>(o.cells), cell_size,
               static_cast<unsigned>(server.port()));

  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
}

}  // namespace

void add_serve(CLI::App& app) {
  auto opts = std::make_shared<ServeOptions>();
  auto* cmd = app.add_subcommand("serve", "Run a block storage server");
  cmd->add_option("--cells", opts->cells, "Number of cells")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--block-size", opts->block_size, "Plaintext block size in bytes")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cell-size", opts->cell_size,
                  "Stored cell size; defaults to block size plus 40 bytes of AEAD overhead");
  cmd->add_option("--listen", opts->listen, "HOST:PORT; port 0 picks a free port")->required();
  cmd->add_option("--backing", opts->backing, "Back the cells with this file instead of memory");
  cmd->add_option("--port-file", opts->port_file, "Write the bound port here once listening");
  cmd->callback([opts] { run_serve(*opts); });
}

}  // namespace dpstore::cli
