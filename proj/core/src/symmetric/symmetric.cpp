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

#include "pqe/symmetric/symmetric.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <memory>
#include <string>

namespace pqe::symmetric {
namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx new_cipher_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw std::bad_alloc();
  return ctx;
}

[[noreturn]] void openssl_failure(const char* what) {
  throw std::runtime_error(std::string("OpenSSL failure: ") + what);
}

Digest hmac_sha256(ByteView key, ByteView data) {
  Digest out{};
  unsigned int len = 0;
  static const std::uint8_t kEmpty = 0;
  const std::uint8_t* key_ptr = key.empty() ? &kEmpty : key.data();
  if (HMAC(EVP_sha256(), key_ptr, static_cast<int>(key.size()), data.data(), data.size(), out.data(),
           &len) == nullptr ||
      len != out.size()) {
    openssl_failure("HMAC-SHA-256");
  }
  return out;
}

// OpenSSL rejects null data pointers for zero-length updates on some paths.
const std::uint8_t* nonnull(ByteView v) {
  static const std::uint8_t kEmpty = 0;
  return v.empty() ? &kEmpty : v.data();
}

}  // namespace

SessionKey::SessionKey(std::span<const std::uint8_t, kKeySize> bytes, DerivationMode mode) : mode_(mode) {
  std::copy(bytes.begin(), bytes.end(), bytes_.begin());
}

Digest sha256(ByteView data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(nonnull(data), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    openssl_failure("SHA-256");
  }
  return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length) {
  if (length > 255 * 32) throw std::invalid_argument("HKDF output too long");
  Digest zero_salt{};
  Digest prk = hmac_sha256(salt.empty() ? ByteView(zero_salt) : salt, ikm);

  Bytes okm;
  okm.reserve(length);
  Bytes block;
  Digest t{};
  std::uint8_t counter = 1;
  while (okm.size() < length) {
    block.clear();
    if (counter > 1) block.insert(block.end(), t.begin(), t.end());
    block.insert(block.end(), info.begin(), info.end());
    block.push_back(counter++);
    t = hmac_sha256(prk, block);
    std::size_t take = std::min(t.size(), length - okm.size());
    okm.insert(okm.end(), t.begin(), t.begin() + static_cast<std::ptrdiff_t>(take));
  }
  secure_zero(prk.data(), prk.size());
  secure_zero(t.data(), t.size());
  return okm;
}

SessionKey derive_session_key(const kem::SharedSecret& ss, DerivationMode mode, ByteView context) {
  if (context.size() > kMaxContextSize) {
    throw std::invalid_argument("key derivation context exceeds 255 bytes");
  }
  switch (mode) {
    case DerivationMode::kV1RawHash: {
      Digest d = sha256(ss.view());
      SessionKey key(d, mode);
      secure_zero(d.data(), d.size());
      return key;
    }
    case DerivationMode::kV2ContextBound: {
      Bytes okm = hkdf_sha256(ss.view(), {}, context, kKeySize);
      SessionKey key(std::span<const std::uint8_t, kKeySize>(okm.data(), kKeySize), mode);
      secure_zero(okm.data(), okm.size());
      return key;
    }
  }
  throw std::invalid_argument("unknown derivation mode");
}

Bytes v2_context(std::string_view sender, std::string_view recipient, std::uint8_t version) {
  static constexpr std::string_view kPrefix = "pqe/v2/";
  static constexpr std::string_view kArrow = "\xE2\x86\x92";
  Bytes ctx;
  ctx.reserve(kPrefix.size() + sender.size() + kArrow.size() + recipient.size() + 1);
  for (std::string_view part : {kPrefix, sender, kArrow, recipient}) {
    ctx.insert(ctx.end(), part.begin(), part.end());
  }
  ctx.push_back(version);
  return ctx;
}

Nonce random_nonce(EntropySource& rng) {
  Nonce n{};
  rng.fill(n);
  return n;
}

AeadSealed aead_seal(const SessionKey& key, const Nonce& nonce, ByteView plaintext, ByteView aad) {
  auto ctx = new_cipher_ctx();
  AeadSealed out;
  out.nonce = nonce;
  out.ciphertext.resize(plaintext.size());

  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) != 1 ||
      EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), nonce.data()) != 1) {
    openssl_failure("AES-256-GCM init");
  }
  int len = 0;
  if (!aad.empty() && EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    openssl_failure("AES-256-GCM aad");
  }
  if (!plaintext.empty() && EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &len, plaintext.data(),
                                              static_cast<int>(plaintext.size())) != 1) {
    openssl_failure("AES-256-GCM encrypt");
  }
  if (EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + out.ciphertext.size(), &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize, out.tag.data()) != 1) {
    openssl_failure("AES-256-GCM final");
  }
  return out;
}

Expected<Bytes, AuthFailure> aead_open(const SessionKey& key, const AeadSealed& sealed, ByteView aad) {
  auto ctx = new_cipher_ctx();
  Bytes plaintext(sealed.ciphertext.size());

  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) != 1 ||
      EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), sealed.nonce.data()) != 1) {
    openssl_failure("AES-256-GCM init");
  }
  int len = 0;
  if (!aad.empty() && EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    openssl_failure("AES-256-GCM aad");
  }
  if (!sealed.ciphertext.empty() &&
      EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len, sealed.ciphertext.data(),
                        static_cast<int>(sealed.ciphertext.size())) != 1) {
    openssl_failure("AES-256-GCM decrypt");
  }
  Tag tag = sealed.tag;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize, tag.data()) != 1) {
    openssl_failure("AES-256-GCM set tag");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), plaintext.data() + plaintext.size(), &len) != 1) {
    secure_zero(plaintext.data(), plaintext.size());
    return unexpected(AuthFailure{});
  }
  return plaintext;
}

}  // namespace pqe::symmetric
