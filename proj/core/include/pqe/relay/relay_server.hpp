// Copyright 2026 The pqe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

#include "pqe/relay/directory.hpp"

namespace pqe::relay {

enum class WireDirection { kInbound, kOutbound };

struct RelayOptions {
  std::string host = "127.0.0.1";
  /// 0 picks an ephemeral port; see RelayServer::port().
  std::uint16_t port = 65432;
  std::size_t queue_capacity = kDefaultQueueCapacity;
  /// Event log. Null silences it.
  std::ostream* log = nullptr;
  /// Observes every frame line as it crosses the relay's sockets.
  std::function<void(WireDirection, ConnectionId, std::string_view)> wire_tap;
};

/// Newline-delimited frame relay over TCP. A connection whose first bytes
/// are an HTTP GET is upgraded to WebSocket, with one frame per text
/// message. All directory state lives on a single I/O thread.
class RelayServer {
 public:
  explicit RelayServer(RelayOptions options);
  ~RelayServer();

  RelayServer(const RelayServer&) = delete;
  RelayServer& operator=(const RelayServer&) = delete;

  /// Binds and listens; throws std::system_error on failure. Logs
  /// "Server running on host:port".
  void listen();

  /// Runs the I/O loop on a background thread (calls listen() if needed).
  void start();

  /// Runs the I/O loop on the calling thread until stop().
  void run();

  void stop();

  std::uint16_t port() const;
  RelayCounters counters() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pqe::relay
