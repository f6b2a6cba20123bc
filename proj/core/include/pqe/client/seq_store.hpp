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

// Per-peer outbound sequence numbers, persisted so a restarted client never
// reuses a number the peer's replay window has already seen.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "pqe/envelope/replay_window.hpp"
#include "pqe/kem/entropy.hpp"

namespace pqe::client {

class SeqStore {
 public:
  /// Empty path keeps counters in memory only.
  explicit SeqStore(std::filesystem::path path = {}, EntropySource& rng = system_entropy());

  /// Reads the file. If it exists but does not parse, counters restart from a
  /// random offset in [2^32, 2^48) so they land above anything previously
  /// sent; returns false in that case.
  bool load();

  /// Returns the next sequence number for `peer` and persists it.
  std::uint64_t next(const std::string& peer);

  std::uint64_t last(const std::string& peer) const;

 private:
  void save() const;

  std::filesystem::path path_;
  EntropySource& rng_;
  std::uint64_t floor_ = 0;
  std::map<std::string, std::uint64_t> last_;
};

/// Inbound replay windows, persisted so a restarted client still rejects
/// envelopes it accepted before the restart. Unparseable lines are dropped.
class ReplayStore {
 public:
  explicit ReplayStore(std::filesystem::path path = {});

  void load();
  envelope::ReplayWindow& window(const std::string& peer);
  /// Writes all windows; call after a successful open.
  void save() const;

 private:
  std::filesystem::path path_;
  std::map<std::string, envelope::ReplayWindow> windows_;
};

}  // namespace pqe::client
