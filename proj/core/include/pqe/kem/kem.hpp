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

// Typed ML-KEM-768 (FIPS 203) key encapsulation.
//
// Decapsulation contract: ML-KEM uses implicit rejection. Decapsulating a
// ciphertext that was not produced for the matching public key (including a
// tampered one) still returns a 32-byte secret; it is pseudorandom and will
// not match the sender's. Tampering is therefore detected by the AEAD layer
// that consumes the derived key, never by kem_decapsulate itself.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "pqe/common/bytes.hpp"
#include "pqe/kem/entropy.hpp"

namespace pqe::kem {

inline constexpr std::size_t kPublicKeySize = 1184;
inline constexpr std::size_t kSecretKeySize = 2400;
inline constexpr std::size_t kCiphertextSize = 1088;
inline constexpr std::size_t kSharedSecretSize = 32;
inline constexpr std::size_t kKeygenCoinsSize = 64;
inline constexpr std::size_t kEncapsCoinsSize = 32;

class InvalidKeyMaterial : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class KeyGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <std::size_t N, bool Secret>
class FixedBytes {
 public:
  static constexpr std::size_t kSize = N;

  std::span<const std::uint8_t, N> bytes() const { return std::span<const std::uint8_t, N>(data_); }
  ByteView view() const { return ByteView(data_.data(), N); }

  friend bool operator==(const FixedBytes& a, const FixedBytes& b) {
    return constant_time_equal(a.view(), b.view());
  }

  FixedBytes(const FixedBytes&) = default;
  FixedBytes& operator=(const FixedBytes&) = default;

  ~FixedBytes() {
    if constexpr (Secret) secure_zero(data_.data(), N);
  }

 protected:
  FixedBytes() = default;
  explicit FixedBytes(ByteView in, const char* what) {
    if (in.size() != N) {
      throw InvalidKeyMaterial(std::string(what) + ": expected " + std::to_string(N) +
                               " bytes, got " + std::to_string(in.size()));
    }
    std::copy(in.begin(), in.end(), data_.begin());
  }
  std::array<std::uint8_t, N>& mutable_bytes() { return data_; }

 private:
  std::array<std::uint8_t, N> data_{};
};

}  // namespace detail

/// Encapsulation key. Construction enforces the length and the FIPS 203
/// modulus check (every packed coefficient < q).
class KemPublicKey : public detail::FixedBytes<kPublicKeySize, false> {
 public:
  explicit KemPublicKey(ByteView in);
};

/// Decapsulation key. Construction enforces the length and the FIPS 203 hash
/// check (the embedded H(ek) matches the embedded ek). Zeroized on release.
class KemSecretKey : public detail::FixedBytes<kSecretKeySize, true> {
 public:
  explicit KemSecretKey(ByteView in);
  /// The encapsulation key embedded in the decapsulation key.
  KemPublicKey public_key() const;
};

class KemCiphertext : public detail::FixedBytes<kCiphertextSize, false> {
 public:
  explicit KemCiphertext(ByteView in) : FixedBytes(in, "ML-KEM-768 ciphertext") {}
};

/// Zeroized on release.
class SharedSecret : public detail::FixedBytes<kSharedSecretSize, true> {
 public:
  explicit SharedSecret(ByteView in) : FixedBytes(in, "ML-KEM-768 shared secret") {}
};

struct KemKeyPair {
  KemPublicKey public_key;
  KemSecretKey secret_key;
};

struct KemEncapsulation {
  KemCiphertext ciphertext;
  SharedSecret shared_secret;
};

/// Draws 64 bytes (d || z) from `rng`. EntropyError from the source is
/// reported as KeyGenerationError; no key is produced in that case.
KemKeyPair kem_generate_keypair(EntropySource& rng);

/// Deterministic ML-KEM.KeyGen_internal(d, z).
KemKeyPair kem_keypair_from_coins(std::span<const std::uint8_t, kKeygenCoinsSize> coins);

/// Draws 32 bytes (m) from `rng`.
KemEncapsulation kem_encapsulate(const KemPublicKey& pk, EntropySource& rng);

/// Deterministic ML-KEM.Encaps_internal(ek, m).
KemEncapsulation kem_encapsulate_with_coins(const KemPublicKey& pk,
                                            std::span<const std::uint8_t, kEncapsCoinsSize> coins);

/// Never fails for well-formed inputs; see the implicit rejection note above.
SharedSecret kem_decapsulate(const KemSecretKey& sk, const KemCiphertext& ct);

}  // namespace pqe::kem
