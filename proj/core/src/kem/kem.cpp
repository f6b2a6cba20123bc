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

#include "pqe/kem/kem.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <memory>

extern "C" {
#include "kem.h"
}

static_assert(pqe::kem::kPublicKeySize == KYBER_PUBLICKEYBYTES);
static_assert(pqe::kem::kSecretKeySize == KYBER_SECRETKEYBYTES);
static_assert(pqe::kem::kCiphertextSize == KYBER_CIPHERTEXTBYTES);
static_assert(pqe::kem::kSharedSecretSize == KYBER_SSBYTES);

// The non-derandomized PQClean entry points reference this symbol; this
// wrapper only calls the *_derand variants, with coins from EntropySource.
extern "C" int PQCLEAN_randombytes(uint8_t* output, size_t n) {
  pqe::system_entropy().fill(std::span<std::uint8_t>(output, n));
  return 0;
}

namespace pqe::kem {
namespace {

constexpr std::size_t kQ = 3329;
constexpr std::size_t kPolyVecBytes = 1152;  // k = 3, 384 bytes per polynomial
constexpr std::size_t kIndCpaSecretKeySize = kPolyVecBytes;

bool coefficients_reduced(ByteView packed) {
  for (std::size_t i = 0; i + 3 <= packed.size(); i += 3) {
    unsigned a = packed[i] | ((packed[i + 1] & 0x0f) << 8);
    unsigned b = (packed[i + 1] >> 4) | (packed[i + 2] << 4);
    if (a >= kQ || b >= kQ) return false;
  }
  return true;
}

std::array<std::uint8_t, 32> sha3_256(ByteView in) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(in.data(), in.size(), out.data(), &len, EVP_sha3_256(), nullptr) != 1 || len != 32) {
    throw std::runtime_error("SHA3-256 failed");
  }
  return out;
}

// FixedBytes constructors are protected; these helpers fill outputs directly.
struct Raw {
  std::array<std::uint8_t, kPublicKeySize> pk{};
  std::array<std::uint8_t, kSecretKeySize> sk{};
  ~Raw() { secure_zero(sk.data(), sk.size()); }
};

}  // namespace

KemPublicKey::KemPublicKey(ByteView in) : FixedBytes(in, "ML-KEM-768 public key") {
  if (!coefficients_reduced(view().first(kPolyVecBytes))) {
    throw InvalidKeyMaterial("ML-KEM-768 public key: coefficient out of range (modulus check)");
  }
}

KemSecretKey::KemSecretKey(ByteView in) : FixedBytes(in, "ML-KEM-768 secret key") {
  auto embedded_pk = view().subspan(kIndCpaSecretKeySize, kPublicKeySize);
  auto embedded_hash = view().subspan(kIndCpaSecretKeySize + kPublicKeySize, 32);
  auto h = sha3_256(embedded_pk);
  if (!constant_time_equal(h, embedded_hash)) {
    throw InvalidKeyMaterial("ML-KEM-768 secret key: embedded public key hash mismatch");
  }
}

KemPublicKey KemSecretKey::public_key() const {
  return KemPublicKey(view().subspan(kIndCpaSecretKeySize, kPublicKeySize));
}

KemKeyPair kem_keypair_from_coins(std::span<const std::uint8_t, kKeygenCoinsSize> coins) {
  Raw raw;
  PQCLEAN_MLKEM768_CLEAN_crypto_kem_keypair_derand(raw.pk.data(), raw.sk.data(), coins.data());
  return KemKeyPair{KemPublicKey(raw.pk), KemSecretKey(raw.sk)};
}

KemKeyPair kem_generate_keypair(EntropySource& rng) {
  std::array<std::uint8_t, kKeygenCoinsSize> coins{};
  try {
    rng.fill(coins);
  } catch (const EntropyError& e) {
    secure_zero(coins.data(), coins.size());
    throw KeyGenerationError(std::string("key generation aborted: ") + e.what());
  }
  auto pair = kem_keypair_from_coins(coins);
  secure_zero(coins.data(), coins.size());
  return pair;
}

KemEncapsulation kem_encapsulate_with_coins(const KemPublicKey& pk,
                                            std::span<const std::uint8_t, kEncapsCoinsSize> coins) {
  std::array<std::uint8_t, kCiphertextSize> ct{};
  std::array<std::uint8_t, kSharedSecretSize> ss{};
  PQCLEAN_MLKEM768_CLEAN_crypto_kem_enc_derand(ct.data(), ss.data(), pk.bytes().data(), coins.data());
  KemEncapsulation out{KemCiphertext(ct), SharedSecret(ss)};
  secure_zero(ss.data(), ss.size());
  return out;
}

KemEncapsulation kem_encapsulate(const KemPublicKey& pk, EntropySource& rng) {
  std::array<std::uint8_t, kEncapsCoinsSize> coins{};
  rng.fill(coins);
  auto out = kem_encapsulate_with_coins(pk, coins);
  secure_zero(coins.data(), coins.size());
  return out;
}

SharedSecret kem_decapsulate(const KemSecretKey& sk, const KemCiphertext& ct) {
  std::array<std::uint8_t, kSharedSecretSize> ss{};
  PQCLEAN_MLKEM768_CLEAN_crypto_kem_dec(ss.data(), ct.bytes().data(), sk.bytes().data());
  SharedSecret out(ss);
  secure_zero(ss.data(), ss.size());
  return out;
}

}  // namespace pqe::kem
