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

#include "pqe/client/peer_store.hpp"

#include <fstream>
#include <sstream>

#include "pqe/client/keystore.hpp"
#include "pqe/wire/frame.hpp"

namespace pqe::client {
namespace fs = std::filesystem;

PeerStore::PeerStore(fs::path path) : path_(std::move(path)) {}

// One line per peer: "<name> <first_seen_ms> <base64 public key>".
std::vector<std::string> PeerStore::load() {
  std::vector<std::string> problems;
  if (path_.empty()) return problems;
  std::ifstream in(path_);
  if (!in) return problems;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, b64;
    std::int64_t first_seen = 0;
    if (!(ls >> name >> first_seen >> b64) || !wire::is_valid_name(name)) {
      problems.push_back(path_.string() + ":" + std::to_string(lineno) + ": unparseable pin");
      continue;
    }
    auto raw = base64_decode(b64);
    if (!raw) {
      problems.push_back(path_.string() + ":" + std::to_string(lineno) + ": bad key encoding");
      continue;
    }
    try {
      kem::KemPublicKey pk(*raw);
      std::string fp = fingerprint(pk.view());
      peers_.insert_or_assign(name, PeerRecord{name, std::move(pk), std::move(fp), first_seen, std::nullopt});
    } catch (const kem::InvalidKeyMaterial& e) {
      problems.push_back(path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return problems;
}

void PeerStore::save() const {
  if (path_.empty()) return;
  fs::path tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& [name, rec] : peers_) {
      out << name << ' ' << rec.first_seen_ms << ' ' << base64_encode(rec.public_key.view()) << '\n';
    }
  }
  std::error_code ec;
  fs::rename(tmp, path_, ec);
}

PinResult PeerStore::observe(const std::string& name, const kem::KemPublicKey& pk, std::int64_t now_ms) {
  auto it = peers_.find(name);
  if (it == peers_.end()) {
    pin(name, pk, now_ms);
    return PinResult::kPinnedNew;
  }
  if (it->second.public_key == pk) {
    it->second.pending.reset();
    return PinResult::kMatches;
  }
  it->second.pending = PendingKey{pk, fingerprint(pk.view())};
  return PinResult::kMismatch;
}

void PeerStore::pin(const std::string& name, const kem::KemPublicKey& pk, std::int64_t now_ms) {
  peers_.insert_or_assign(name, PeerRecord{name, pk, fingerprint(pk.view()), now_ms, std::nullopt});
  save();
}

bool PeerStore::repin(const std::string& name, std::int64_t now_ms) {
  auto it = peers_.find(name);
  if (it == peers_.end() || !it->second.pending) return false;
  kem::KemPublicKey pk = it->second.pending->public_key;
  pin(name, pk, now_ms);
  return true;
}

const PeerRecord* PeerStore::find(const std::string& name) const {
  auto it = peers_.find(name);
  return it == peers_.end() ? nullptr : &it->second;
}

std::vector<PeerRecord> PeerStore::list() const {
  std::vector<PeerRecord> out;
  for (const auto& [_, rec] : peers_) out.push_back(rec);
  return out;
}

}  // namespace pqe::client
