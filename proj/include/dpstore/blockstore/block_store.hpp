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

#ifndef DPSTORE_BLOCKSTORE_BLOCK_STORE_HPP_
#define DPSTORE_BLOCKSTORE_BLOCK_STORE_HPP_

#include <atomic>
#include <cstdint>
#include <string>

#include "dpstore/common.hpp"

namespace dpstore::blockstore {

struct StoreCounters {
  std::uint64_t downloads = 0;
  std::uint64_t uploads = 0;

  std::uint64_t touches() const { return downloads + uploads; }
};

// Server array of `cells` fixed-size ciphertext cells, addressed 1..cells.
// Only download and upload cross the client/server boundary; the counters
// record every one of them and are the ground truth for overhead numbers.
class BlockStore {
 public:
  BlockStore(std::uint64_t cells, std::size_t cell_size);
  virtual ~BlockStore() = default;

  BlockStore(const BlockStore&) = delete;
  BlockStore& operator=(const BlockStore&) = delete;

  std::uint64_t cells() const { return cells_; }
  std::size_t cell_size() const { return cell_size_; }

  // Throws AddressError unless 1 <= addr <= cells().
  Bytes download(BlockId addr);
  // Throws AddressError on a bad address, FrameError on a wrong-size payload.
  void upload(BlockId addr, ByteView ciphertext);

  StoreCounters counters() const;
  void reset_counters();

  void check_address(BlockId addr) const;

 protected:
  // `index` is 0-based and already validated.
  virtual Bytes do_download(std::uint64_t index) = 0;
  virtual void do_upload(std::uint64_t index, ByteView ciphertext) = 0;

 private:
  std::uint64_t cells_;
  std::size_t cell_size_;
  std::atomic<std::uint64_t> downloads_{0};
  std::atomic<std::uint64_t> uploads_{0};
};

// Contiguous in-memory array; cells start zero-filled.
class MemoryStore final : public BlockStore {
 public:
  MemoryStore(std::uint64_t cells, std::size_t cell_size);

 protected:
  Bytes do_download(std::uint64_t index) override;
  void do_upload(std::uint64_t index, ByteView ciphertext) override;

 private:
  Bytes data_;
};

// Single preallocated file of `cells` fixed-size records; record i lives at
// offset (i - 1) * cell_size. No journaling.
class FileStore final : public BlockStore {
 public:
  // Opens `path`, creating and zero-extending it to the full size if needed.
  // An existing file of a different size is rejected.
  FileStore(const std::string& path, std::uint64_t cells, std::size_t cell_size);
  ~FileStore() override;

 protected:
  Bytes do_download(std::uint64_t index) override;
  void do_upload(std::uint64_t index, ByteView ciphertext) override;

 private:
  int fd_ = -1;
};

}  // namespace dpstore::blockstore

#endif  // DPSTORE_BLOCKSTORE_BLOCK_STORE_HPP_
