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

#include "pqe/client/seq_store.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "pqe/wire/frame.hpp"

namespace pqe::client {
namespace fs = std::filesystem;

SeqStore::SeqStore(fs::path path, EntropySource& rng) : path_(std::move(path)), rng_(rng) {}

bool SeqStore::load() {
  last_.clear();
  floor_ = 0;
  if (path_.empty()) return true;
  std::error_code ec;
  if (!fs::exists(path_, ec)) return true;

  std::ifstream in(path_);
  std::map<std::string, std::uint64_t> parsed;
  bool ok = static_cast<bool>(in);
  std::string line;
  while (ok && std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string peer, extra;
    std::uint64_t seq = 0;
    if (!(ls >> peer >> seq) || (ls >> extra) || !wire::is_valid_name(peer)) ok = false;
    else parsed[peer] = seq;
  }
  if (ok) {
    last_ = std::move(parsed);
    return true;
  }
  std::array<std::uint8_t, 8> buf{};
  rng_.fill(buf);
  std::uint64_t r = 0;
  for (auto b : buf) r = (r << 8) | b;
  floor_ = (std::uint64_t{1} << 32) + r % ((std::uint64_t{1} << 48) - (std::uint64_t{1} << 32));
  return false;
}

std::uint64_t SeqStore::last(const std::string& peer) const {
  auto it = last_.find(peer);
  return it == last_.end() ? floor_ : it->second;
}

std::uint64_t SeqStore::next(const std::string& peer) {
  std::uint64_t seq = last(peer) + 1;
  last_[peer] = seq;
  save();
  return seq;
}

void SeqStore::save() const {
  if (path_.empty()) return;
  fs::path tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& [peer, seq] : last_) out << peer << ' ' << seq << '\n';
  }
  std::error_code ec;
  fs::rename(tmp, path_, ec);
}

ReplayStore::ReplayStore(fs::path path) : path_(std::move(path)) {}

void ReplayStore::load() {
  windows_.clear();
  if (path_.empty()) return;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string peer;
    std::uint64_t highest = 0, mask = 0;
    if (ls >> peer >> highest >> mask && wire::is_valid_name(peer)) {
      windows_[peer] = envelope::ReplayWindow::restore(highest, mask);
    }
  }
}

envelope::ReplayWindow& ReplayStore::window(const std::string& peer) { return windows_[peer]; }

void ReplayStore::save() const {
  if (path_.empty()) return;
  fs::path tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& [peer, w] : windows_) {
      if (!w.empty()) out << peer << ' ' << w.highest() << ' ' << w.mask() << '\n';
    }
  }
  std::error_code ec;
  fs::rename(tmp, path_, ec);
}

}  // namespace pqe::client
