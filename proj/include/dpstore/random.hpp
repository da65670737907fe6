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

#ifndef DPSTORE_RANDOM_HPP_
#define DPSTORE_RANDOM_HPP_

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace dpstore {

// Calls sodium_init() once; every entry point that touches libsodium goes
// through here.
void ensure_sodium();

// ChaCha20 keystream generator. Seeded instances are reproducible; instances
// from `from_os()` are keyed from the OS CSPRNG. Satisfies
// UniformRandomBitGenerator.
class ChaChaRng {
 public:
  using result_type = std::uint64_t;
  using Key = std::array<std::uint8_t, 32>;

  explicit ChaChaRng(std::uint64_t seed, std::string_view stream = {});
  explicit ChaChaRng(const Key& key);

  static ChaChaRng from_os();

  // Independent child stream; the same label always yields the same child.
  ChaChaRng derive(std::string_view label) const;
  ChaChaRng derive(std::uint64_t index) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on [0, bound), unbiased. bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  // Uniform on [1, n].
  std::uint64_t index(std::uint64_t n) { return below(n) + 1; }
  // Uniform on [0, 1) with 53 bits of resolution.
  double unit();

  void fill(std::uint8_t* out, std::size_t len);

 private:
  void refill();

  Key key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 1024> buffer_{};
  std::size_t pos_ = sizeof(buffer_);
};

}  // namespace dpstore

#endif  // DPSTORE_RANDOM_HPP_
