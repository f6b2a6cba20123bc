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

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pqe/wire/frame.hpp"

namespace pqe::relay {

using ConnectionId = std::uint64_t;

inline constexpr std::size_t kDefaultQueueCapacity = 128;

struct Outbound {
  ConnectionId to;
  wire::Frame frame;
};

struct RelayCounters {
  std::uint64_t registered = 0;
  std::uint64_t relayed = 0;
  std::uint64_t queued = 0;
  std::uint64_t flushed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t errors = 0;
};

/// Name registry, key directory and offline queues. Pure state machine:
/// callers feed frames in and write the returned frames out. Payloads are
/// stored and forwarded verbatim; only base64 validity and size are checked.
class Directory {
 public:
  using LogSink = std::function<void(std::string_view)>;

  explicit Directory(LogSink log = {}, std::size_t queue_capacity = kDefaultQueueCapacity);

  std::vector<Outbound> handle(ConnectionId from, const wire::Frame& frame);

  /// For lines that failed to parse as frames.
  std::vector<Outbound> reject(ConnectionId from, std::string detail);

  void disconnect(ConnectionId conn);

  const RelayCounters& counters() const { return counters_; }
  std::optional<std::string> name_of(ConnectionId conn) const;
  bool is_online(std::string_view name) const;
  std::size_t queued_for(std::string_view name) const;

 private:
  struct Queued {
    std::string from;
    std::string payload;
  };
  struct Entry {
    std::optional<ConnectionId> conn;
    std::string public_key;
    std::deque<Queued> queue;
  };

  std::vector<Outbound> handle_register(ConnectionId from, const std::string& name);
  std::vector<Outbound> handle_publish_key(ConnectionId from, const std::string& payload);
  std::vector<Outbound> handle_fetch_key(ConnectionId from, const std::string& peer);
  std::vector<Outbound> handle_send(ConnectionId from, const std::string& to, const std::string& payload);
  std::vector<Outbound> error(ConnectionId to, wire::ErrorCode code, std::string peer, std::string detail);
  void log(const std::string& line) const;

  LogSink log_;
  std::size_t queue_capacity_;
  std::map<std::string, Entry, std::less<>> entries_;
  std::map<ConnectionId, std::string> names_;
  RelayCounters counters_;
};

}  // namespace pqe::relay
