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

#include "pqe/relay/directory.hpp"

#include "pqe/common/bytes.hpp"

namespace pqe::relay {

using wire::ErrorCode;
using wire::Frame;
using wire::FrameType;

Directory::Directory(LogSink log, std::size_t queue_capacity)
    : log_(std::move(log)), queue_capacity_(queue_capacity == 0 ? 1 : queue_capacity) {}

void Directory::log(const std::string& line) const {
  if (log_) log_(line);
}

std::vector<Outbound> Directory::error(ConnectionId to, ErrorCode code, std::string peer, std::string detail) {
  ++counters_.errors;
  log("Error " + std::string(wire::to_string(code)) + (detail.empty() ? "" : " (" + detail + ")") +
      " errors=" + std::to_string(counters_.errors));
  return {Outbound{to, wire::make_error(code, std::move(peer), std::move(detail))}};
}

std::vector<Outbound> Directory::handle(ConnectionId from, const Frame& frame) {
  switch (frame.type) {
    case FrameType::kRegister:
      return handle_register(from, frame.name);
    case FrameType::kPublishKey:
      return handle_publish_key(from, frame.payload);
    case FrameType::kFetchKey:
      return handle_fetch_key(from, frame.peer);
    case FrameType::kSend:
      return handle_send(from, frame.peer, frame.payload);
    default:
      return error(from, ErrorCode::kMalformed, {},
                   "unexpected frame type " + std::string(wire::to_string(frame.type)));
  }
}

std::vector<Outbound> Directory::reject(ConnectionId from, std::string detail) {
  return error(from, ErrorCode::kMalformed, {}, std::move(detail));
}

std::vector<Outbound> Directory::handle_register(ConnectionId from, const std::string& name) {
  if (!wire::is_valid_name(name)) return error(from, ErrorCode::kMalformed, name, "invalid name");
  if (auto it = names_.find(from); it != names_.end()) {
    return error(from, ErrorCode::kMalformed, name, "connection already registered as " + it->second);
  }
  Entry& entry = entries_[name];
  if (entry.conn) return error(from, ErrorCode::kNameTaken, name, {});

  entry.conn = from;
  names_[from] = name;
  ++counters_.registered;
  log("Registered " + name);

  std::vector<Outbound> out{{from, wire::make_register_ok(name)}};
  if (!entry.queue.empty()) {
    std::size_t n = entry.queue.size();
    for (auto& q : entry.queue) out.push_back({from, wire::make_deliver(std::move(q.from), std::move(q.payload))});
    entry.queue.clear();
    counters_.flushed += n;
    log("Delivered " + std::to_string(n) + " queued message(s) to " + name);
  }
  return out;
}

std::vector<Outbound> Directory::handle_publish_key(ConnectionId from, const std::string& payload) {
  auto it = names_.find(from);
  if (it == names_.end()) return error(from, ErrorCode::kMalformed, {}, "register before publishing a key");
  auto raw = base64_decode(payload);
  if (!raw) return error(from, ErrorCode::kMalformed, it->second, "public key is not valid base64");
  if (raw->size() != wire::kPublicKeySize) {
    return error(from, ErrorCode::kMalformed, it->second,
                 "public key must be " + std::to_string(wire::kPublicKeySize) + " bytes");
  }
  entries_[it->second].public_key = payload;
  log("Published key for " + it->second);
  return {};
}

std::vector<Outbound> Directory::handle_fetch_key(ConnectionId from, const std::string& peer) {
  auto it = entries_.find(peer);
  if (it == entries_.end() || it->second.public_key.empty()) return error(from, ErrorCode::kUnknownPeer, peer, {});
  return {Outbound{from, wire::make_key(peer, it->second.public_key)}};
}

std::vector<Outbound> Directory::handle_send(ConnectionId from, const std::string& to, const std::string& payload) {
  auto sender = names_.find(from);
  if (sender == names_.end()) return error(from, ErrorCode::kMalformed, to, "register before sending");
  if (!base64_decode(payload)) return error(from, ErrorCode::kMalformed, to, "payload is not valid base64");
  auto it = entries_.find(to);
  if (it == entries_.end()) return error(from, ErrorCode::kUnknownPeer, to, {});

  Entry& recipient = it->second;
  const std::string& from_name = sender->second;
  if (recipient.conn) {
    ++counters_.relayed;
    log("Relayed message from " + from_name + " to " + to);
    return {Outbound{*recipient.conn, wire::make_deliver(from_name, payload)}};
  }

  std::vector<Outbound> out;
  if (recipient.queue.size() >= queue_capacity_) {
    recipient.queue.pop_front();
    ++counters_.dropped;
    log("Queue full for " + to + ", dropped oldest dropped=" + std::to_string(counters_.dropped));
    out.push_back({from, wire::make_error(ErrorCode::kQueueFull, to, "oldest queued message dropped")});
  }
  recipient.queue.push_back({from_name, payload});
  ++counters_.queued;
  log("Queued message from " + from_name + " to " + to + " queued=" + std::to_string(recipient.queue.size()));
  return out;
}

void Directory::disconnect(ConnectionId conn) {
  auto it = names_.find(conn);
  if (it == names_.end()) return;
  auto entry = entries_.find(it->second);
  if (entry != entries_.end() && entry->second.conn == conn) entry->second.conn.reset();
  log("Disconnected " + it->second);
  names_.erase(it);
}

std::optional<std::string> Directory::name_of(ConnectionId conn) const {
  auto it = names_.find(conn);
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

bool Directory::is_online(std::string_view name) const {
  auto it = entries_.find(name);
  return it != entries_.end() && it->second.conn.has_value();
}

std::size_t Directory::queued_for(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? 0 : it->second.queue.size();
}

}  // namespace pqe::relay
