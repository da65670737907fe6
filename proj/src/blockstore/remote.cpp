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

#include "dpstore/blockstore/remote.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>

namespace dpstore::blockstore {

Endpoint Endpoint::parse(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ParameterError("expected HOST:PORT, got '" + text + "'");
  }
  Endpoint e;
  e.host = text.substr(0, colon);
  unsigned long port = 0;
  try {
    port = std::stoul(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw ParameterError("bad port in '" + text + "'");
  }
  if (port > 65535) throw ParameterError("bad port in '" + text + "'");
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

namespace {

addrinfo* resolve(const Endpoint& e, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  std::string port = std::to_string(e.port);
  int rc = ::getaddrinfo(e.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw IoError("resolve " + e.str() + ": " + ::gai_strerror(rc));
  return res;
}

}  // namespace

RemoteStore::RemoteStore(const Endpoint& endpoint, std::uint64_t cells,
                         std::size_t cell_size)
    : BlockStore(cells, cell_size) {
  addrinfo* res = resolve(endpoint, false);
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw IoError("cannot connect to " + endpoint.str());
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

RemoteStore::~RemoteStore() {
  if (fd_ >= 0) ::close(fd_);
}

wire::Frame RemoteStore::exchange(const wire::Frame& request) {
  if (tap_) tap_(true, wire::encode(request));
  wire::write_frame(fd_, request);
  auto response = wire::read_frame(fd_);
  if (!response) throw IoError("server closed the session");
  if (tap_) tap_(false, wire::encode(*response));
  return *response;
}

Bytes RemoteStore::do_download(std::uint64_t index) {
  auto resp = exchange({wire::Opcode::kDownload, index, {}});
  if (resp.opcode == wire::Opcode::kError) wire::raise_error(resp);
  if (resp.opcode != wire::Opcode::kDownload || resp.address != index ||
      resp.payload.size() != cell_size()) {
    throw FrameError("malformed DOWNLOAD response");
  }
  return std::move(resp.payload);
}

void RemoteStore::do_upload(std::uint64_t index, ByteView ciphertext) {
  auto resp =
      exchange({wire::Opcode::kUpload, index, Bytes(ciphertext.begin(), ciphertext.end())});
  if (resp.opcode == wire::Opcode::kError) wire::raise_error(resp);
  if (resp.opcode != wire::Opcode::kUpload || resp.address != index ||
      !resp.payload.empty()) {
    throw FrameError("malformed UPLOAD response");
  }
}

BlockServer::BlockServer(BlockStore& store, Endpoint listen)
    : store_(store), listen_(std::move(listen)) {}

BlockServer::~BlockServer() { stop(); }

void BlockServer::start() {
  addrinfo* res = resolve(listen_, true);
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      sockaddr_storage bound{};
      socklen_t len = sizeof(bound);
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
      if (bound.ss_family == AF_INET) {
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
      } else {
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
      }
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) throw IoError("cannot listen on " + listen_.str());
  acceptor_ = std::thread([this] { accept_loop(); });
}

void BlockServer::accept_loop() {
  while (!stopping_.load()) {
    int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard<std::mutex> lock(sessions_mu_);
    if (stopping_.load()) {
      ::close(fd);
      break;
    }
    session_fds_.push_back(fd);
    sessions_.emplace_back([this, fd] { serve_session(fd); });
  }
}

void BlockServer::serve_session(int fd) {
  try {
    while (auto request = wire::read_frame(fd)) {
      wire::write_frame(fd, handle(*request));
    }
  } catch (const FrameError& e) {
    // The stream is out of sync after a bad header; report and hang up.
    try {
      wire::write_frame(fd, wire::error_frame(0, std::string("FrameError: ") + e.what()));
    } catch (const Error&) {
    }
  } catch (const Error&) {
  }
  ::shutdown(fd, SHUT_RDWR);
}

wire::Frame BlockServer::handle(const wire::Frame& request) {
  const std::uint64_t index = request.address;
  if (request.opcode == wire::Opcode::kError) {
    return wire::error_frame(index, "FrameError: ERROR is not a request opcode");
  }
  if (index >= store_.cells()) {
    return wire::error_frame(index, "AddressError: address " + std::to_string(index) +
                                        " outside [0, " + std::to_string(store_.cells()) +
                                        ")");
  }
  try {
    if (request.opcode == wire::Opcode::kDownload) {
      if (!request.payload.empty()) {
        return wire::error_frame(index, "FrameError: DOWNLOAD request carries a payload");
      }
      std::lock_guard<std::mutex> lock(lock_for(index));
      return {wire::Opcode::kDownload, index, store_.download(index + 1)};
    }
    if (request.payload.size() != store_.cell_size()) {
      return wire::error_frame(index, "FrameError: payload of " +
                                          std::to_string(request.payload.size()) +
                                          " bytes, cells hold " +
                                          std::to_string(store_.cell_size()));
    }
    std::lock_guard<std::mutex> lock(lock_for(index));
    store_.upload(index + 1, request.payload);
    return {wire::Opcode::kUpload, index, {}};
  } catch (const Error& e) {
    return wire::error_frame(index, std::string("IoError: ") + e.what());
  }
}

void BlockServer::stop() {
  if (stopping_.exchange(true)) {
    if (acceptor_.joinable()) acceptor_.join();
    return;
  }
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::vector<std::thread> sessions;
  std::vector<int> fds;
  {
    std::lock_guard<std::mutex> lock(sessions_mu_);
    sessions.swap(sessions_);
    fds.swap(session_fds_);
  }
  for (int fd : fds) ::shutdown(fd, SHUT_RDWR);
  for (auto& t : sessions) t.join();
  for (int fd : fds) ::close(fd);
}

void BlockServer::wait() {
  while (!stopping_.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace dpstore::blockstore
