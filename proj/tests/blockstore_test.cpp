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

#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/blockstore/wire.hpp"

namespace dpstore::blockstore {
namespace {

namespace fs = std::filesystem;

Bytes pattern(std::size_t n, std::uint8_t seed) {
  Bytes b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(seed + i * 31);
  return b;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("dpstore-test-" + std::to_string(::getpid()) + "-" +
                                         std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

TEST(AeadCipher, RoundTripAndFreshness) {
  AeadCipher c(CipherKey::generate());
  Bytes b = pattern(1024, 3);
  Bytes x = c.encrypt(b), y = c.encrypt(b);
  EXPECT_EQ(x.size(), 1024u + 40u);
  EXPECT_EQ(c.ciphertext_size(1024), x.size());
  EXPECT_NE(x, y);
  EXPECT_EQ(c.decrypt(x), b);
  EXPECT_EQ(c.decrypt(y), b);
}

TEST(AeadCipher, WrongKeyFailsAuthentication) {
  AeadCipher a(CipherKey::generate()), b(CipherKey::generate());
  Bytes ct = a.encrypt(pattern(64, 1));
  EXPECT_THROW(b.decrypt(ct), IntegrityError);
}

TEST(AeadCipher, TamperAndTruncationDetected) {
  AeadCipher c(CipherKey::generate());
  Bytes ct = c.encrypt(pattern(64, 1));
  Bytes flipped = ct;
  flipped[30] ^= 1;
  EXPECT_THROW(c.decrypt(flipped), IntegrityError);
  EXPECT_THROW(c.decrypt(ByteView(ct.data(), 20)), IntegrityError);
}

TEST(AeadCipher, SeededNoncesReplay) {
  auto key = CipherKey::generate();
  AeadCipher a(key, ChaChaRng(1, "n")), b(key, ChaChaRng(1, "n"));
  EXPECT_EQ(a.encrypt(pattern(16, 0)), b.encrypt(pattern(16, 0)));
}

TEST(CipherKey, SaveLoad) {
  TempDir dir;
  auto key = CipherKey::generate();
  const std::string path = (dir.path() / "k").string();
  key.save(path);
  EXPECT_EQ(CipherKey::load(path).bytes(), key.bytes());
  {
    std::ofstream raw(dir.path() / "raw", std::ios::binary);
    raw.write(reinterpret_cast<const char*>(key.bytes().data()), 32);
  }
  EXPECT_EQ(CipherKey::load((dir.path() / "raw").string()).bytes(), key.bytes());
  EXPECT_THROW(CipherKey::from_bytes(Bytes(16, 0)), ParameterError);
}

TEST(TransparentCipher, IdentityWithTag) {
  TransparentCipher c;
  Bytes b = pattern(10, 9);
  Bytes x = c.encrypt(b), y = c.encrypt(b);
  EXPECT_EQ(x.size(), 26u);
  EXPECT_TRUE(std::equal(b.begin(), b.end(), x.begin()));
  EXPECT_NE(x, y);
  EXPECT_EQ(c.decrypt(x), b);
}

void read_your_write(BlockStore& s) {
  const std::size_t cs = s.cell_size();
  s.upload(1, pattern(cs, 1));
  s.upload(s.cells(), pattern(cs, 2));
  EXPECT_EQ(s.download(1), pattern(cs, 1));
  EXPECT_EQ(s.download(s.cells()), pattern(cs, 2));
  EXPECT_EQ(s.download(1), s.download(1));
  s.upload(1, pattern(cs, 3));
  EXPECT_EQ(s.download(1), pattern(cs, 3));
  EXPECT_THROW(s.download(0), AddressError);
  EXPECT_THROW(s.download(s.cells() + 1), AddressError);
  EXPECT_THROW(s.upload(0, pattern(cs, 0)), AddressError);
  EXPECT_THROW(s.upload(1, pattern(cs + 1, 0)), FrameError);
}

TEST(MemoryStore, ReadYourWrite) {
  MemoryStore s(8, 24);
  read_your_write(s);
  EXPECT_EQ(s.download(4), Bytes(24, 0));
}

TEST(MemoryStore, CountersRecordEveryOperation) {
  MemoryStore s(4, 8);
  s.upload(1, Bytes(8, 1));
  s.download(1);
  s.download(2);
  EXPECT_EQ(s.counters().uploads, 1u);
  EXPECT_EQ(s.counters().downloads, 2u);
  EXPECT_EQ(s.counters().touches(), 3u);
  EXPECT_THROW(s.download(9), AddressError);
  EXPECT_EQ(s.counters().touches(), 3u);
  s.reset_counters();
  EXPECT_EQ(s.counters().touches(), 0u);
}

TEST(FileStore, ReadYourWriteAndPersistence) {
  TempDir dir;
  const std::string path = (dir.path() / "cells.bin").string();
  {
    FileStore s(path, 16, 40);
    read_your_write(s);
    EXPECT_EQ(fs::file_size(path), 16u * 40u);
  }
  FileStore again(path, 16, 40);
  EXPECT_EQ(again.download(1), pattern(40, 3));
  EXPECT_EQ(again.download(16), pattern(40, 2));
  EXPECT_THROW(FileStore(path, 17, 40), ParameterError);
}

TEST(FileStore, RecordOffsets) {
  TempDir dir;
  const std::string path = (dir.path() / "cells.bin").string();
  {
    FileStore s(path, 3, 4);
    s.upload(2, Bytes{1, 2, 3, 4});
  }
  std::ifstream in(path, std::ios::binary);
  Bytes raw((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(raw, (Bytes{0, 0, 0, 0, 1, 2, 3, 4, 0, 0, 0, 0}));
}

TEST(Wire, EncodeLayoutIsBigEndian) {
  wire::Frame f{wire::Opcode::kUpload, 0x0102030405060708ULL, Bytes{0xaa, 0xbb}};
  EXPECT_EQ(to_hex(wire::encode(f)), "02010203040506070800000002aabb");
}

TEST(Wire, DecodeRoundTripAndPartial) {
  wire::Frame f{wire::Opcode::kDownload, 5, Bytes(3, 7)};
  Bytes enc = wire::encode(f);
  std::size_t used = 0;
  EXPECT_FALSE(wire::decode(ByteView(enc.data(), 5), &used));
  EXPECT_FALSE(wire::decode(ByteView(enc.data(), enc.size() - 1), &used));
  auto back = wire::decode(enc, &used);
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, f);
  EXPECT_EQ(used, enc.size());
}

TEST(Wire, RejectsUnknownOpcodeAndOversize) {
  Bytes bad = from_hex("03 0000000000000000 00000000");
  std::size_t used = 0;
  EXPECT_THROW(wire::decode(bad, &used), FrameError);
  Bytes big = from_hex("01 0000000000000000 7fffffff");
  EXPECT_THROW(wire::decode(big, &used), FrameError);
}

TEST(Wire, ErrorFramesMapToExceptions) {
  EXPECT_THROW(wire::raise_error(wire::error_frame(1, "AddressError: x")), AddressError);
  EXPECT_THROW(wire::raise_error(wire::error_frame(1, "FrameError: x")), FrameError);
  EXPECT_THROW(wire::raise_error(wire::error_frame(1, "IoError: x")), IoError);
}

}  // namespace
}  // namespace dpstore::blockstore
