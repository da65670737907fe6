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

// Framed binary protocol spoken between RemoteStore and BlockServer.
//
//   frame = opcode (1 byte) | address (8 bytes) | length (4 bytes) | payload
//
// Integers are big-endian. Addresses on the wire are 0-based; the public API
// is 1-based and converts at the boundary.
//
//   0x01 DOWNLOAD  request length 0; response carries the cell
//   0x02 UPLOAD    request payload is the ciphertext; response length 0
//   0x7F ERROR     payload is a UTF-8 message, "<kind>: <detail>"

#ifndef DPSTORE_BLOCKSTORE_WIRE_HPP_
#define DPSTORE_BLOCKSTORE_WIRE_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "dpstore/common.hpp"

namespace dpstore::blockstore::wire {

enum class Opcode : std::uint8_t {
  kDownload = 0x01,
  kUpload = 0x02,
  kError = 0x7F,
};

inline constexpr std::size_t kHeaderSize = 13;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

struct Frame {
  Opcode opcode = Opcode::kDownload;
  std::uint64_t address = 0;  // 0-based
  Bytes payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

Bytes encode(const Frame& frame);

// Decodes one frame from the front of `data`. Returns nullopt when more bytes
// are needed; throws FrameError on an unknown opcode or oversize length.
std::optional<Frame> decode(ByteView data, std::size_t* consumed);

// Blocking socket helpers. read_frame returns nullopt on clean EOF before the
// first header byte.
std::optional<Frame> read_frame(int fd);
void write_frame(int fd, const Frame& frame);

Frame error_frame(std::uint64_t address, const std::string& message);

// Rethrows a server ERROR frame as the matching exception type.
[[noreturn]] void raise_error(const Frame& frame);

}  // namespace dpstore::blockstore::wire

#endif  // DPSTORE_BLOCKSTORE_WIRE_HPP_
