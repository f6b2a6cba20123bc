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

// Messaging endpoint. All mutable state (connection, pins, sequence
// counters, replay windows) lives on one event-loop thread; the public
// methods post work to that loop and block on the result, so they may be
// called from any thread except from inside an event callback.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqe/client/keystore.hpp"
#include "pqe/client/peer_store.hpp"
#include "pqe/envelope/envelope.hpp"

namespace pqe::client {

struct AgentConfig {
  std::string name;
  std::string relay_host = "127.0.0.1";
  std::uint16_t relay_port = 65432;
  std::filesystem::path key_dir = ".";
  std::uint8_t envelope_version = envelope::kVersionV2;
  std::uint32_t rekey_every = 1;
  std::size_t opener_cache = 16;
  std::chrono::milliseconds request_timeout{5000};
  std::chrono::milliseconds backoff_initial{100};
  std::chrono::milliseconds backoff_max{5000};
  std::size_t history_limit = 1000;
  /// Public key files pinned before any relay fetch (--pin-file).
  std::vector<std::filesystem::path> pin_files;
  /// Keep pins and sequence counters in memory only.
  bool ephemeral_state = false;
  /// Diagnostics (connection state, security warnings). Null disables.
  std::ostream* log = nullptr;
  /// Null means the system entropy source.
  EntropySource* rng = nullptr;
};

enum class EventDirection { kInbound, kOutbound };

struct ChatEvent {
  EventDirection direction = EventDirection::kInbound;
  std::string peer;
  std::optional<std::string> text;
  /// "Auth", "Replay" or "Malformed" when an inbound envelope was rejected.
  std::optional<std::string> failure;
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
};

std::string_view to_string(EventDirection direction);

/// One display line: "[alice] Hii bob", or a failure notice.
std::string format_event(const ChatEvent& event);

class SendError : public std::runtime_error {
 public:
  enum class Kind { kInvalid, kUnknownPeer, kFingerprintMismatch, kNotConnected, kTimeout };

  SendError(Kind kind, std::string message, std::string pinned_fingerprint = {},
            std::string offered_fingerprint = {})
      : std::runtime_error(std::move(message)),
        kind_(kind),
        pinned_(std::move(pinned_fingerprint)),
        offered_(std::move(offered_fingerprint)) {}

  Kind kind() const { return kind_; }
  const std::string& pinned_fingerprint() const { return pinned_; }
  const std::string& offered_fingerprint() const { return offered_; }

 private:
  Kind kind_;
  std::string pinned_;
  std::string offered_;
};

class AgentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AgentStatus {
  bool connected = false;
  bool registered = false;
  std::uint64_t reconnects = 0;
};

class ClientAgent {
 public:
  using Subscriber = std::function<void(const ChatEvent&)>;

  /// Loads or creates the identity and local state. Throws KeyStoreError on
  /// corrupt key material.
  explicit ClientAgent(AgentConfig config);
  ~ClientAgent();

  ClientAgent(const ClientAgent&) = delete;
  ClientAgent& operator=(const ClientAgent&) = delete;

  /// Connects, registers and publishes the public key. Throws AgentError if
  /// the first registration does not succeed within the request timeout.
  void start();
  void stop();

  const Identity& identity() const;

  /// FETCH_KEY, then pin on first sight or verify the pin.
  PeerRecord resolve_peer(const std::string& peer);

  /// Resolve, seal to the pinned key, SEND. Returns the sequence number.
  std::uint64_t send_message(const std::string& peer, const std::string& text);

  std::vector<PeerRecord> peers();

  /// Accepts the pending key for `peer`. False if nothing is pending.
  bool repin(const std::string& peer);

  /// Callbacks run on the event loop and must not call back into the agent.
  std::uint64_t subscribe(Subscriber subscriber);
  void unsubscribe(std::uint64_t id);

  /// Atomically returns the history and subscribes, so no event is missed
  /// or duplicated between the two.
  std::vector<ChatEvent> subscribe_with_history(Subscriber subscriber, std::uint64_t& id);

  std::vector<ChatEvent> history();
  AgentStatus status();

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pqe::client
