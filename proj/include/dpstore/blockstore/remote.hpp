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

#ifndef DPSTORE_BLOCKSTORE_REMOTE_HPP_
#define DPSTORE_BLOCKSTORE_REMOTE_HPP_

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dpstore/blockstore/block_store.hpp"
#include "dpstore/blockstore/wire.hpp"

namespace dpstore::blockstore {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  // "HOST:PORT"
  static Endpoint parse(const std::string& text);
  std::string str() const;
};

// Client side of the wire protocol: one TCP session, one request/response
// pair at a time. Cell count and size are deployment parameters the client is
// configured with; the server enforces them as well.
class RemoteStore final : public BlockStore {
 public:
  RemoteStore(const Endpoint& endpoint, std::uint64_t cells, std::size_t cell_size);
  ~RemoteStore() override;

  // Observes every byte written to / read from the socket, in order.
  using Tap = std::function<void(bool outbound, ByteView bytes)>;
  void set_tap(Tap tap) { tap_ = std::move(tap); }

  // Sends a raw frame and returns the raw response, bypassing local checks.
  wire::Frame exchange(const wire::Frame& request);

 protected:
  Bytes do_download(std::uint64_t index) override;
  void do_upload(std::uint64_t index, ByteView ciphertext) override;

 private:
  int fd_ = -1;
  Tap tap_;
};

// Serves a BlockStore over TCP. Each accepted connection is a session on its
// own thread; each download/upload is atomic per address.
class BlockServer {
 public:
  BlockServer(BlockStore& store, Endpoint listen);
  ~BlockServer();

  BlockServer(const BlockServer&) = delete;
  BlockServer& operator=(const BlockServer&) = delete;

  // Binds and starts accepting in the background. Port 0 picks a free port.
  void start();
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  std::uint16_t port() const { return port_; }

 private:
  void accept_loop();
  void serve_session(int fd);
  wire::Frame handle(const wire::Frame& request);
  std::mutex& lock_for(std::uint64_t index) { return stripes_[index % stripes_.size()]; }

  BlockStore& store_;
  Endpoint listen_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex sessions_mu_;
  std::vector<std::thread> sessions_;
  std::vector<int> session_fds_;
  std::array<std::mutex, 64> stripes_;
};

}  // namespace dpstore::blockstore

#endif  // DPSTORE_BLOCKSTORE_REMOTE_HPP_
