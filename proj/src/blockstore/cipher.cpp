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

#include "dpstore/blockstore/cipher.hpp"

#include <sodium.h>

#include <filesystem>
#include <fstream>
#include <iterator>

namespace dpstore::blockstore {

CipherKey CipherKey::generate() {
  ensure_sodium();
  CipherKey key;
  randombytes_buf(key.bytes_.data(), key.bytes_.size());
  return key;
}

CipherKey CipherKey::from_bytes(ByteView bytes) {
  if (bytes.size() != kSize) {
    throw ParameterError("cipher key must be " + std::to_string(kSize) + " bytes");
  }
  CipherKey key;
  std::copy(bytes.begin(), bytes.end(), key.bytes_.begin());
  return key;
}

CipherKey CipherKey::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read key file " + path);
  Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() == kSize) return from_bytes(raw);
  std::string text(raw.begin(), raw.end());
  return from_bytes(from_hex(text));
}

void CipherKey::save(const std::string& path) const {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write key file " + path);
  }
  // Owner-only before the key bytes land in the file.
  std::filesystem::permissions(path, std::filesystem::perms::owner_read |
                                         std::filesystem::perms::owner_write);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << to_hex(bytes_) << '\n';
  if (!out) throw IoError("cannot write key file " + path);
}

AeadCipher::AeadCipher(const CipherKey& key) : key_(key) { ensure_sodium(); }

AeadCipher::AeadCipher(const CipherKey& key, ChaChaRng nonce_source)
    : key_(key), nonce_source_(std::move(nonce_source)) {
  ensure_sodium();
}

Bytes AeadCipher::encrypt(ByteView plaintext) {
  Bytes out(plaintext.size() + overhead());
  std::uint8_t* nonce = out.data();
  if (nonce_source_) {
    nonce_source_->fill(nonce, kNonceSize);
  } else {
    randombytes_buf(nonce, kNonceSize);
  }
  unsigned long long written = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + kNonceSize, &written,
                                             plaintext.data(), plaintext.size(),
                                             nullptr, 0, nullptr, nonce,
                                             key_.bytes().data());
  return out;
}

Bytes AeadCipher::decrypt(ByteView ciphertext) const {
  if (ciphertext.size() < overhead()) throw IntegrityError("ciphertext too short");
  Bytes out(ciphertext.size() - overhead());
  unsigned long long written = 0;
  int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(
      out.data(), &written, nullptr, ciphertext.data() + kNonceSize,
      ciphertext.size() - kNonceSize, nullptr, 0, ciphertext.data(), key_.bytes().data());
  if (rc != 0) throw IntegrityError("ciphertext failed authentication");
  return out;
}

TransparentCipher::TransparentCipher() : tag_source_(ChaChaRng::from_os()) {}

TransparentCipher::TransparentCipher(ChaChaRng tag_source)
    : tag_source_(std::move(tag_source)) {}

Bytes TransparentCipher::encrypt(ByteView plaintext) {
  Bytes out(plaintext.size() + kTagSize);
  std::copy(plaintext.begin(), plaintext.end(), out.begin());
  tag_source_.fill(out.data() + plaintext.size(), kTagSize);
  return out;
}

Bytes TransparentCipher::decrypt(ByteView ciphertext) const {
  if (ciphertext.size() < kTagSize) throw IntegrityError("ciphertext too short");
  return Bytes(ciphertext.begin(), ciphertext.end() - kTagSize);
}

}  // namespace dpstore::blockstore
