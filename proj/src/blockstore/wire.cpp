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

#include "dpstore/blockstore/wire.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace dpstore::blockstore::wire {

namespace {

void put_be(Bytes& out, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(const std::uint8_t* p, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | p[i];
  return v;
}

bool valid_opcode(std::uint8_t op) {
  return op == static_cast<std::uint8_t>(Opcode::kDownload) ||
         op == static_cast<std::uint8_t>(Opcode::kUpload) ||
         op == static_cast<std::uint8_t>(Opcode::kError);
}

// Returns false on EOF before any byte was read.
bool read_exact(int fd, std::uint8_t* out, std::size_t len, bool allow_eof) {
  std::size_t done = 0;
  while (done < len) {
    ssize_t n = ::recv(fd, out + done, len - done, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n == 0 && done == 0 && allow_eof) return false;
    if (n <= 0) throw IoError("connection closed mid-frame");
    done += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

Bytes encode(const Frame& frame) {
  if (frame.payload.size() > kMaxPayload) throw FrameError("payload too large");
  Bytes out;
  out.reserve(kHeaderSize + frame.payload.size());
  out.push_back(static_cast<std::uint8_t>(frame.opcode));
  put_be(out, frame.address, 8);
  put_be(out, frame.payload.size(), 4);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

std::optional<Frame> decode(ByteView data, std::size_t* consumed) {
  if (data.size() < kHeaderSize) return std::nullopt;
  if (!valid_opcode(data[0])) throw FrameError("unknown opcode");
  auto length = static_cast<std::uint32_t>(get_be(data.data() + 9, 4));
  if (length > kMaxPayload) throw FrameError("frame length exceeds limit");
  if (data.size() < kHeaderSize + length) return std::nullopt;
  Frame f;
  f.opcode = static_cast<Opcode>(data[0]);
  f.address = get_be(data.data() + 1, 8);
  f.payload.assign(data.begin() + kHeaderSize, data.begin() + kHeaderSize + length);
  if (consumed) *consumed = kHeaderSize + length;
  return f;
}

std::optional<Frame> read_frame(int fd) {
  std::uint8_t header[kHeaderSize];
  if (!read_exact(fd, header, kHeaderSize, true)) return std::nullopt;
  if (!valid_opcode(header[0])) throw FrameError("unknown opcode");
  auto length = static_cast<std::uint32_t>(get_be(header + 9, 4));
  if (length > kMaxPayload) throw FrameError("frame length exceeds limit");
  Frame f;
  f.opcode = static_cast<Opcode>(header[0]);
  f.address = get_be(header + 1, 8);
  f.payload.resize(length);
  if (length > 0) read_exact(fd, f.payload.data(), length, false);
  return f;
}

void write_frame(int fd, const Frame& frame) {
  Bytes bytes = encode(frame);
  std::size_t done = 0;
  while (done < bytes.size()) {
    ssize_t n = ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw IoError(std::string("send: ") + std::strerror(errno));
    done += static_cast<std::size_t>(n);
  }
}

Frame error_frame(std::uint64_t address, const std::string& message) {
  return Frame{Opcode::kError, address, Bytes(message.begin(), message.end())};
}

void raise_error(const Frame& frame) {
  std::string msg(frame.payload.begin(), frame.payload.end());
  auto starts = [&](std::string_view prefix) { return msg.rfind(prefix, 0) == 0; };
  if (starts("AddressError")) throw AddressError(msg);
  if (starts("FrameError")) throw FrameError(msg);
  throw IoError("server error: " + msg);
}

}  // namespace dpstore::blockstore::wire
