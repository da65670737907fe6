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

// Helpers shared by the dpstore command-line subcommands.

#ifndef DPSTORE_TOOLS_CLI_HPP_
#define DPSTORE_TOOLS_CLI_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/blockstore/remote.hpp"
#include "dpstore/common.hpp"
#include "json.hpp"

namespace dpstore::cli {

using Json = nlohmann::ordered_json;

// Exit codes beyond 0 (success) and 1 (error).
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitAbsent = 3;

void add_serve(CLI::App& app);
void add_dpir(CLI::App& app);
void add_dpram(CLI::App& app);
void add_maptool(CLI::App& app);
void add_dpkvs(CLI::App& app);
void add_audit(CLI::App& app);
void add_bench(CLI::App& app);

// Ends the command with `code` after the callback returns.
[[noreturn]] void exit_with(int code);

Bytes read_file(const std::string& path);
void write_file(const std::string& path, ByteView data);
bool file_exists(const std::string& path);

Json read_json(const std::string& path);
// Writes an owner-only temporary sibling, then renames it over `path`.
void write_json(const std::string& path, const Json& value);

// Loads the key at `path`, generating and saving one when it is missing.
blockstore::CipherKey load_or_create_key(const std::string& path);

// n zero-padded blocks: consecutive chunks of `data_file`, or the text
// "block-<i>" when no file is given.
std::vector<Bytes> initial_blocks(std::uint64_t n, std::size_t block_size,
                                  const std::string& data_file);

// Remote store when `server` is set, else a file-backed store at `file`.
std::unique_ptr<blockstore::BlockStore> open_store(const std::optional<std::string>& server,
                                                   const std::optional<std::string>& file,
                                                   std::uint64_t cells, std::size_t cell_size);

}  // namespace dpstore::cli

#endif  // DPSTORE_TOOLS_CLI_HPP_
