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

// Trust-on-first-use pins. The first key seen for a peer is pinned and
// persisted; a later, different key is held as pending and never used until
// the user explicitly re-pins.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pqe/kem/kem.hpp"

namespace pqe::client {

struct PendingKey {
  kem::KemPublicKey public_key;
  std::string fingerprint;
};

struct PeerRecord {
  std::string name;
  kem::KemPublicKey public_key;
  std::string fingerprint;
  std::int64_t first_seen_ms = 0;
  std::optional<PendingKey> pending;
};

enum class PinResult { kPinnedNew, kMatches, kMismatch };

class PeerStore {
 public:
  /// Empty path keeps pins in memory only.
  explicit PeerStore(std::filesystem::path path = {});

  /// Loads pins from disk. Lines that do not parse are skipped and reported
  /// in the returned list.
  std::vector<std::string> load();

  /// Pins on first sight, otherwise compares. A mismatch records the offered
  /// key as pending and leaves the pin untouched.
  PinResult observe(const std::string& name, const kem::KemPublicKey& pk, std::int64_t now_ms);

  /// Unconditionally pins `pk` (pin files, explicit trust).
  void pin(const std::string& name, const kem::KemPublicKey& pk, std::int64_t now_ms);

  /// Promotes the pending key to the pin. False if nothing is pending.
  bool repin(const std::string& name, std::int64_t now_ms);

  const PeerRecord* find(const std::string& name) const;
  std::vector<PeerRecord> list() const;

 private:
  void save() const;

  std::filesystem::path path_;
  std::map<std::string, PeerRecord> peers_;
};

}  // namespace pqe::client
