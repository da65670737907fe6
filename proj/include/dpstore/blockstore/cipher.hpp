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

#ifndef DPSTORE_BLOCKSTORE_CIPHER_HPP_
#define DPSTORE_BLOCKSTORE_CIPHER_HPP_

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "dpstore/common.hpp"
#include "dpstore/random.hpp"

namespace dpstore::blockstore {

// 256-bit symmetric key.
class CipherKey {
 public:
  static constexpr std::size_t kSize = 32;

  static CipherKey generate();
  static CipherKey from_bytes(ByteView bytes);
  // Raw 32-byte file, or 64 hex characters.
  static CipherKey load(const std::string& path);
  void save(const std::string& path) const;

  const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

// Randomized symmetric encryption of fixed-size blocks. Every call to
// encrypt() draws fresh randomness, so equal plaintexts give unequal
// ciphertexts.
class Cipher {
 public:
  virtual ~Cipher() = default;

  virtual std::size_t overhead() const = 0;
  virtual Bytes encrypt(ByteView plaintext) = 0;
  // Throws IntegrityError when the ciphertext does not authenticate.
  virtual Bytes decrypt(ByteView ciphertext) const = 0;

  std::size_t ciphertext_size(std::size_t block_size) const {
    return block_size + overhead();
  }
};

// XChaCha20-Poly1305 with a random 192-bit nonce prepended to each
// ciphertext.
class AeadCipher final : public Cipher {
 public:
  static constexpr std::size_t kNonceSize = 24;
  static constexpr std::size_t kTagSize = 16;

  // Nonces from the OS CSPRNG.
  explicit AeadCipher(const CipherKey& key);
  // Nonces from a caller-owned stream (reproducible tests).
  AeadCipher(const CipherKey& key, ChaChaRng nonce_source);

  std::size_t overhead() const override { return kNonceSize + kTagSize; }
  Bytes encrypt(ByteView plaintext) override;
  Bytes decrypt(ByteView ciphertext) const override;

 private:
  CipherKey key_;
  std::optional<ChaChaRng> nonce_source_;
};

// Audit-mode cipher: ciphertext = plaintext || 16 random bytes. The tag keeps
// the fresh-randomness contract but nothing is hidden.
class TransparentCipher final : public Cipher {
 public:
  static constexpr std::size_t kTagSize = 16;

  TransparentCipher();
  explicit TransparentCipher(ChaChaRng tag_source);

  std::size_t overhead() const override { return kTagSize; }
  Bytes encrypt(ByteView plaintext) override;
  Bytes decrypt(ByteView ciphertext) const override;

 private:
  ChaChaRng tag_source_;
};

}  // namespace dpstore::blockstore

#endif  // DPSTORE_BLOCKSTORE_CIPHER_HPP_
