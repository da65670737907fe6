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

#include "dpstore/random.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>

namespace dpstore {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  });
}

namespace {

ChaChaRng::Key hash_key(const std::uint8_t* key, std::size_t key_len,
                        const std::uint8_t* msg, std::size_t msg_len) {
  ChaChaRng::Key out{};
  crypto_generichash(out.data(), out.size(), msg, msg_len, key, key_len);
  return out;
}

}  // namespace

ChaChaRng::ChaChaRng(std::uint64_t seed, std::string_view stream) {
  ensure_sodium();
  std::string msg = "dpstore.rng/";
  for (int i = 0; i < 8; ++i) msg.push_back(static_cast<char>(seed >> (8 * i)));
  msg.push_back('/');
  msg.append(stream);
  key_ = hash_key(nullptr, 0, reinterpret_cast<const std::uint8_t*>(msg.data()),
                  msg.size());
}

ChaChaRng::ChaChaRng(const Key& key) : key_(key) { ensure_sodium(); }

ChaChaRng ChaChaRng::from_os() {
  ensure_sodium();
  Key key;
  randombytes_buf(key.data(), key.size());
  return ChaChaRng(key);
}

ChaChaRng ChaChaRng::derive(std::string_view label) const {
  return ChaChaRng(
      hash_key(key_.data(), key_.size(),
               reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
}

ChaChaRng ChaChaRng::derive(std::uint64_t index) const {
  std::uint8_t msg[9] = {'#'};
  for (int i = 0; i < 8; ++i) msg[1 + i] = static_cast<std::uint8_t>(index >> (8 * i));
  return ChaChaRng(hash_key(key_.data(), key_.size(), msg, sizeof(msg)));
}

void ChaChaRng::refill() {
  static constexpr std::uint8_t kNonce[crypto_stream_chacha20_NONCEBYTES] = {};
  std::memset(buffer_.data(), 0, buffer_.size());
  crypto_stream_chacha20_xor_ic(buffer_.data(), buffer_.data(), buffer_.size(), kNonce,
                                counter_, key_.data());
  counter_ += buffer_.size() / 64;
  pos_ = 0;
}

ChaChaRng::result_type ChaChaRng::operator()() {
  if (pos_ + 8 > buffer_.size()) refill();
  std::uint64_t v;
  std::memcpy(&v, buffer_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

std::uint64_t ChaChaRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("ChaChaRng::below(0)");
  // Lemire's multiply-shift with rejection; exact uniformity.
  std::uint64_t x = (*this)();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double ChaChaRng::unit() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

void ChaChaRng::fill(std::uint8_t* out, std::size_t len) {
  while (len > 0) {
    if (pos_ == buffer_.size()) refill();
    std::size_t take = std::min(len, buffer_.size() - pos_);
    std::memcpy(out, buffer_.data() + pos_, take);
    pos_ += take;
    out += take;
    len -= take;
  }
}

}  // namespace dpstore
