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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace dpstore::cli {

void exit_with(int code) { throw CLI::RuntimeError(code); }

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read state file " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParameterError("state file " + path + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const Json& value) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream(tmp, std::ios::trunc);
  }
  // State and key files carry plaintext blocks and keys.
  std::filesystem::permissions(
      tmp, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write);
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << value.dump(2) << '\n';
    if (!out) throw IoError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

blockstore::CipherKey load_or_create_key(const std::string& path) {
  if (file_exists(path)) return blockstore::CipherKey::load(path);
  auto key = blockstore::CipherKey::generate();
  key.save(path);
  std::fprintf(stderr, "generated key %s\n", path.c_str());
  return key;
}

std::vector<Bytes> initial_blocks(std::uint64_t n, std::size_t block_size,
                                  const std::string& data_file) {
  std::vector<Bytes> blocks(n, Bytes(block_size, 0));
  if (data_file.empty()) {
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string label = "block-" + std::to_string(i + 1);
      std::copy_n(label.begin(), std::min(label.size(), block_size), blocks[i].begin());
    }
    return blocks;
  }
  Bytes data = read_file(data_file);
  if (data.size() > n * block_size) {
    throw ParameterError("data file holds " + std::to_string(data.size()) +
                         " bytes, more than n * block size");
  }
  for (std::size_t off = 0; off < data.size(); ++off) {
    blocks[off / block_size][off % block_size] = data[off];
  }
  return blocks;
}

std::unique_ptr<blockstore::BlockStore> open_store(const std::optional<std::string>& server,
                                                   const std::optional<std::string>& file,
                                                   std::uint64_t cells, std::size_t cell_size) {
  if (server) {
    return std::make_unique<blockstore::RemoteStore>(blockstore::Endpoint::parse(*server), cells,
                                                     cell_size);
  }
  if (file) return std::make_unique<blockstore::FileStore>(*file, cells, cell_size);
  throw ParameterError("no backend: pass --server HOST:PORT or a local store");
}

}  // namespace dpstore::cli
