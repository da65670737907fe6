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

#ifndef DPSTORE_COMMON_HPP_
#define DPSTORE_COMMON_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpstore {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Block and cell identifiers are 1-based throughout the public API.
using BlockId = std::uint64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or malformed arguments.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Cell address outside [1, m].
class AddressError : public Error {
 public:
  using Error::Error;
};

// Payload of the wrong length, or an unparseable wire frame.
class FrameError : public Error {
 public:
  using Error::Error;
};

// Ciphertext failed authentication.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Mapping scheme could not place a key (super root at capacity).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Exact enumeration requested on an instance too large to enumerate.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Transport or filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

}  // namespace dpstore

#endif  // DPSTORE_COMMON_HPP_
