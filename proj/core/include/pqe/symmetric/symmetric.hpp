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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>

#include "pqe/common/bytes.hpp"
#include "pqe/common/expected.hpp"
#include "pqe/kem/entropy.hpp"
#include "pqe/kem/kem.hpp"

namespace pqe::symmetric {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kMaxContextSize = 255;

using Nonce = std::array<std::uint8_t, kNonceSize>;
using Tag = std::array<std::uint8_t, kTagSize>;
using Digest = std::array<std::uint8_t, 32>;

/// V1 hashes the shared secret with SHA-256. V2 runs HKDF-SHA-256 with the
/// caller's context as `info`. The numeric values are the envelope version
/// bytes that select them.
enum class DerivationMode : std::uint8_t {
  kV1RawHash = 0x01,
  kV2ContextBound = 0x02,
};

class SessionKey {
 public:
  SessionKey(std::span<const std::uint8_t, kKeySize> bytes, DerivationMode mode);
  SessionKey(const SessionKey&) = default;
  SessionKey& operator=(const SessionKey&) = default;
  ~SessionKey() { secure_zero(bytes_.data(), bytes_.size()); }

  std::span<const std::uint8_t, kKeySize> bytes() const { return bytes_; }
  DerivationMode mode() const { return mode_; }

  friend bool operator==(const SessionKey& a, const SessionKey& b) {
    return a.mode_ == b.mode_ && constant_time_equal(a.bytes_, b.bytes_);
  }

 private:
  std::array<std::uint8_t, kKeySize> bytes_;
  DerivationMode mode_;
};

struct AeadSealed {
  Nonce nonce{};
  Bytes ciphertext;
  Tag tag{};
};

/// The only failure aead_open reports. It carries no cause on purpose.
struct AuthFailure {};

Digest sha256(ByteView data);

/// RFC 5869 with SHA-256. An empty salt means HashLen zero bytes.
Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);

/// Throws std::invalid_argument when the context exceeds 255 bytes. The
/// context is ignored in V1.
SessionKey derive_session_key(const kem::SharedSecret& ss, DerivationMode mode, ByteView context);

/// "pqe/v2/" || sender || U+2192 || recipient || version.
Bytes v2_context(std::string_view sender, std::string_view recipient, std::uint8_t version);

Nonce random_nonce(EntropySource& rng);

/// AES-256-GCM. The nonce must never repeat under one key.
AeadSealed aead_seal(const SessionKey& key, const Nonce& nonce, ByteView plaintext, ByteView aad);

/// Returns the plaintext only if key, nonce, ciphertext, tag and aad all
/// match the sealing call. No partial plaintext escapes on failure.
Expected<Bytes, AuthFailure> aead_open(const SessionKey& key, const AeadSealed& sealed, ByteView aad);

}  // namespace pqe::symmetric
