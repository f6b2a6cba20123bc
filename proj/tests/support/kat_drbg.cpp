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

#include "kat_drbg.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <memory>
#include <stdexcept>

#include "pqe/kem/kem.hpp"

namespace pqe::testing {
namespace {

void aes256_ecb(const std::uint8_t key[32], const std::uint8_t in[16], std::uint8_t out[16]) {
  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  int len = 0;
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ecb(), nullptr, key, nullptr) != 1 ||
      EVP_CIPHER_CTX_set_padding(ctx.get(), 0) != 1 || EVP_EncryptUpdate(ctx.get(), out, &len, in, 16) != 1) {
    throw std::runtime_error("AES-256-ECB failed");
  }
}

std::string upper_hex(ByteView b) {
  std::string s = to_hex(b);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

}  // namespace

KatDrbg::KatDrbg(std::span<const std::uint8_t, 48> entropy) { update(entropy.data()); }

void KatDrbg::block(std::uint8_t out[16]) {
  for (int i = 15; i >= 0; --i) {
    if (++v_[i] != 0) break;
  }
  aes256_ecb(key_.data(), v_.data(), out);
}

void KatDrbg::update(const std::uint8_t* provided) {
  std::uint8_t temp[48];
  for (int i = 0; i < 3; ++i) block(temp + 16 * i);
  if (provided) {
    for (int i = 0; i < 48; ++i) temp[i] ^= provided[i];
  }
  std::copy(temp, temp + 32, key_.begin());
  std::copy(temp + 32, temp + 48, v_.begin());
}

void KatDrbg::random_bytes(std::span<std::uint8_t> out) {
  std::uint8_t blk[16];
  std::size_t done = 0;
  while (done < out.size()) {
    block(blk);
    std::size_t n = std::min<std::size_t>(16, out.size() - done);
    std::copy(blk, blk + n, out.begin() + static_cast<std::ptrdiff_t>(done));
    done += n;
  }
  update(nullptr);
}

Bytes KatDrbg::random_bytes(std::size_t n) {
  Bytes b(n);
  random_bytes(std::span<std::uint8_t>(b));
  return b;
}

std::string mlkem768_kat_records(std::size_t count) {
  std::array<std::uint8_t, 48> entropy{};
  for (std::size_t i = 0; i < entropy.size(); ++i) entropy[i] = static_cast<std::uint8_t>(i);
  KatDrbg outer(entropy);

  std::string text;
  for (std::size_t i = 0; i < count; ++i) {
    std::array<std::uint8_t, 48> seed{};
    outer.random_bytes(seed);
    KatDrbg drbg(seed);
    std::array<std::uint8_t, kem::kKeygenCoinsSize> kg{};
    std::array<std::uint8_t, kem::kEncapsCoinsSize> m{};
    drbg.random_bytes(kg);
    auto kp = kem::kem_keypair_from_coins(kg);
    drbg.random_bytes(m);
    auto enc = kem::kem_encapsulate_with_coins(kp.public_key, m);
    auto ss = kem::kem_decapsulate(kp.secret_key, enc.ciphertext);
    if (!(ss == enc.shared_secret)) throw std::runtime_error("KAT record decapsulation mismatch");

    text += "count = " + std::to_string(i) + "\n";
    text += "seed = " + upper_hex(seed) + "\n";
    text += "pk = " + upper_hex(kp.public_key.view()) + "\n";
    text += "sk = " + upper_hex(kp.secret_key.view()) + "\n";
    text += "ct = " + upper_hex(enc.ciphertext.view()) + "\n";
    text += "ss = " + upper_hex(enc.shared_secret.view()) + "\n";
  }
  return text;
}

}  // namespace pqe::testing
