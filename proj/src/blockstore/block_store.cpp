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

#include "dpstore/blockstore/block_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

namespace dpstore::blockstore {

BlockStore::BlockStore(std::uint64_t cells, std::size_t cell_size)
    : cells_(cells), cell_size_(cell_size) {
  if (cells == 0) throw ParameterError("store needs at least one cell");
  if (cell_size == 0) throw ParameterError("cell size must be positive");
}

void BlockStore::check_address(BlockId addr) const {
  if (addr < 1 || addr > cells_) {
    throw AddressError("address " + std::to_string(addr) + " outside [1, " +
                       std::to_string(cells_) + "]");
  }
}

Bytes BlockStore::download(BlockId addr) {
  check_address(addr);
  downloads_.fetch_add(1, std::memory_order_relaxed);
  return do_download(addr - 1);
}

void BlockStore::upload(BlockId addr, ByteView ciphertext) {
  check_address(addr);
  if (ciphertext.size() != cell_size_) {
    throw FrameError("payload of " + std::to_string(ciphertext.size()) +
                     " bytes, cells hold " + std::to_string(cell_size_));
  }
  uploads_.fetch_add(1, std::memory_order_relaxed);
  do_upload(addr - 1, ciphertext);
}

StoreCounters BlockStore::counters() const {
  return {downloads_.load(std::memory_order_relaxed),
          uploads_.load(std::memory_order_relaxed)};
}

void BlockStore::reset_counters() {
  downloads_.store(0);
  uploads_.store(0);
}

MemoryStore::MemoryStore(std::uint64_t cells, std::size_t cell_size)
    : BlockStore(cells, cell_size), data_(cells * cell_size, 0) {}

Bytes MemoryStore::do_download(std::uint64_t index) {
  auto begin = data_.begin() + static_cast<std::ptrdiff_t>(index * cell_size());
  return Bytes(begin, begin + static_cast<std::ptrdiff_t>(cell_size()));
}

void MemoryStore::do_upload(std::uint64_t index, ByteView ciphertext) {
  std::memcpy(data_.data() + index * cell_size(), ciphertext.data(), ciphertext.size());
}

FileStore::FileStore(const std::string& path, std::uint64_t cells, std::size_t cell_size)
    : BlockStore(cells, cell_size) {
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("open " + path + ": " + std::strerror(errno));
  struct stat st {};
  if (::fstat(fd_, &st) != 0) {
    ::close(fd_);
    throw IoError("stat " + path + ": " + std::strerror(errno));
  }
  auto want = static_cast<off_t>(cells * cell_size);
  if (st.st_size == 0) {
    if (::ftruncate(fd_, want) != 0) {
      ::close(fd_);
      throw IoError("preallocate " + path + ": " + std::strerror(errno));
    }
  } else if (st.st_size != want) {
    ::close(fd_);
    throw ParameterError(path + " holds " + std::to_string(st.st_size) +
                         " bytes, expected " + std::to_string(want));
  }
}

FileStore::~FileStore() {
  if (fd_ >= 0) ::close(fd_);
}

Bytes FileStore::do_download(std::uint64_t index) {
  Bytes out(cell_size());
  std::size_t done = 0;
  auto offset = static_cast<off_t>(index * cell_size());
  while (done < out.size()) {
    ssize_t n = ::pread(fd_, out.data() + done, out.size() - done,
                        offset + static_cast<off_t>(done));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw IoError(std::string("pread: ") + std::strerror(errno));
    done += static_cast<std::size_t>(n);
  }
  return out;
}

void FileStore::do_upload(std::uint64_t index, ByteView ciphertext) {
  std::size_t done = 0;
  auto offset = static_cast<off_t>(index * cell_size());
  while (done < ciphertext.size()) {
    ssize_t n = ::pwrite(fd_, ciphertext.data() + done, ciphertext.size() - done,
                         offset + static_cast<off_t>(done));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw IoError(std::string("pwrite: ") + std::strerror(errno));
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace dpstore::blockstore
