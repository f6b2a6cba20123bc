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

// Envelope wire format (all integers big-endian):
//
//   "PQE1" | version:1 | sender_len:1 | sender | recipient_len:1 | recipient
//   | seq:8 | kem_ct:1088 | nonce:12 | ct_len:4 | ciphertext | tag:16
//
// The AEAD associated data is the prefix from the magic through seq.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pqe/common/bytes.hpp"
#include "pqe/common/expected.hpp"
#include "pqe/envelope/replay_window.hpp"
#include "pqe/kem/entropy.hpp"
#include "pqe/kem/kem.hpp"
#include "pqe/symmetric/symmetric.hpp"

namespace pqe::envelope {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'P', 'Q', 'E', '1'};
inline constexpr std::uint8_t kVersionV1 = 0x01;
inline constexpr std::uint8_t kVersionV2 = 0x02;
inline constexpr std::size_t kMaxNameSize = 64;
inline constexpr std::size_t kMaxPlaintextSize = std::size_t{1} << 20;

/// Encoded size minus the two names and the ciphertext.
inline constexpr std::size_t kFixedOverhead =
    kMagic.size() + 1 + 1 + 1 + 8 + kem::kCiphertextSize + symmetric::kNonceSize + 4 + symmetric::kTagSize;

constexpr std::size_t encoded_size(std::size_t sender_len, std::size_t recipient_len, std::size_t plaintext_len) {
  return kFixedOverhead + sender_len + recipient_len + plaintext_len;
}

class EnvelopeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EnvelopeHeader {
  std::uint8_t version = kVersionV2;
  std::string sender;
  std::string recipient;
  std::uint64_t seq = 0;

  friend bool operator==(const EnvelopeHeader&, const EnvelopeHeader&) = default;
};

struct Envelope {
  EnvelopeHeader header;
  kem::KemCiphertext kem_ct;
  symmetric::Nonce nonce{};
  Bytes ciphertext;
  symmetric::Tag tag{};

  friend bool operator==(const Envelope& a, const Envelope& b) {
    return a.header == b.header && a.kem_ct == b.kem_ct && a.nonce == b.nonce && a.ciphertext == b.ciphertext &&
           a.tag == b.tag;
  }
};

struct Malformed {
  std::string reason;
};

enum class OpenFailure {
  kReplay,
  kAuth,
  kMalformed,
};

std::string_view to_string(OpenFailure failure);

/// Version 1 or 2, names of 1..64 bytes of valid UTF-8.
bool header_is_valid(const EnvelopeHeader& header);

symmetric::DerivationMode derivation_mode(std::uint8_t version);

/// The AEAD associated data: magic through seq.
Bytes header_aad(const EnvelopeHeader& header);

/// Session key for an envelope header; V2 binds sender, recipient and
/// version into the derivation.
symmetric::SessionKey derive_envelope_key(const kem::SharedSecret& ss, const EnvelopeHeader& header);

Bytes encode_envelope(const Envelope& env);

/// Rejects truncation, bad magic, unknown versions, bad names, a ciphertext
/// over the plaintext cap, and trailing bytes.
Expected<Envelope, Malformed> decode_envelope(ByteView bytes);

/// One fresh encapsulation per call. Throws EnvelopeError on an invalid
/// header or a plaintext over kMaxPlaintextSize.
Envelope hybrid_seal(const kem::KemPublicKey& recipient_pk, const EnvelopeHeader& header, ByteView plaintext,
                     EntropySource& rng);

/// Replay check, decapsulation, key derivation and AEAD open. The window
/// is updated only when the plaintext is returned.
Expected<Bytes, OpenFailure> hybrid_open(const kem::KemSecretKey& recipient_sk, const Envelope& env,
                                         ReplayWindow& window);

}  // namespace pqe::envelope
