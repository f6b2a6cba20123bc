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
#include <span>
#include <stdexcept>
#include <vector>

namespace pqe {

class EntropyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source of random bytes for key generation, encapsulation and nonces.
/// Implementations throw EntropyError when they cannot fill the request.
class EntropySource {
 public:
  virtual ~EntropySource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

/// Kernel CSPRNG (getrandom(2)).
class SystemEntropy final : public EntropySource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Process-wide instance; SystemEntropy holds no state.
SystemEntropy& system_entropy();

/// Replays a fixed byte script, then fails. Used for known-answer tests.
class ScriptedEntropy final : public EntropySource {
 public:
  explicit ScriptedEntropy(std::vector<std::uint8_t> script) : script_(std::move(script)) {}
  void fill(std::span<std::uint8_t> out) override;
  std::size_t remaining() const { return script_.size() - offset_; }

 private:
  std::vector<std::uint8_t> script_;
  std::size_t offset_ = 0;
};

}  // namespace pqe
