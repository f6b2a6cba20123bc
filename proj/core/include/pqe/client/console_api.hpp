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

// Loopback HTTP API over a ClientAgent. Every request must carry
// "Authorization: Bearer <token>" (or "?token=<token>" for clients such as
// EventSource that cannot set headers).
//
//   GET  /identity             {name, fingerprint, fingerprint_display}
//   GET  /peers                [{name, fingerprint, fingerprint_display, first_seen_ms, pinned, pending_fingerprint?}]
//   POST /send {peer, text}    200 {seq} | 400 | 404 UNKNOWN_PEER | 409 FINGERPRINT_MISMATCH {pinned, offered}
//                              | 503 NOT_CONNECTED | 504 TIMEOUT
//   GET  /events               text/event-stream; history first, then live
//                              events {direction, peer, text | failure, seq, timestamp}
//   POST /peers/{name}/repin   200 {repinned: true} | 409 NO_PENDING_KEY

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "pqe/client/agent.hpp"

namespace pqe::client {

struct ConsoleOptions {
  /// 0 picks an ephemeral port; see ConsoleApi::port().
  std::uint16_t port = 0;
  /// Empty generates a random 128-bit token.
  std::string token;
  /// Interval between SSE keepalive comments.
  std::chrono::milliseconds keepalive{15000};
};

class ConsoleApi {
 public:
  ConsoleApi(ClientAgent& agent, ConsoleOptions options = {});
  ~ConsoleApi();

  ConsoleApi(const ConsoleApi&) = delete;
  ConsoleApi& operator=(const ConsoleApi&) = delete;

  /// Binds 127.0.0.1 and serves on a background thread. Throws
  /// std::runtime_error if the port cannot be bound.
  void start();
  void stop();

  std::uint16_t port() const;
  const std::string& token() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pqe::client
