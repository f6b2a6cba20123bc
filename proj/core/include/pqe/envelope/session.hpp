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

// Amortized sealing. With rekey_every == 1 (the default) every envelope
// carries a fresh encapsulation, identical to hybrid_seal. Larger values
// reuse one encapsulation and its session key for up to N envelopes to the
// same recipient; nonces stay random per envelope. The receiving side
// caches session keys by KEM ciphertext so reused encapsulations are
// decapsulated once.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>

#include "pqe/envelope/envelope.hpp"

namespace pqe::envelope {

class EnvelopeSealer {
 public:
  explicit EnvelopeSealer(std::uint32_t rekey_every = 1);

  Envelope seal(const kem::KemPublicKey& recipient_pk, const EnvelopeHeader& header, ByteView plaintext,
                EntropySource& rng);

  std::uint32_t rekey_every() const { return rekey_every_; }
  std::size_t encapsulations() const { return encapsulations_; }

 private:
  struct Cached {
    kem::KemPublicKey pk;
    std::uint8_t version;
    std::string sender;
    kem::KemCiphertext ct;
    symmetric::SessionKey key;
    std::uint32_t uses;
  };

  std::uint32_t rekey_every_;
  std::size_t encapsulations_ = 0;
  std::map<std::string, Cached> by_recipient_;
};

class EnvelopeOpener {
 public:
  /// `cache_capacity` 0 disables the session-key cache.
  explicit EnvelopeOpener(kem::KemSecretKey sk, std::size_t cache_capacity = 0);

  Expected<Bytes, OpenFailure> open(const Envelope& env, ReplayWindow& window);

  std::size_t decapsulations() const { return decapsulations_; }
  const kem::KemSecretKey& secret_key() const { return sk_; }

 private:
  struct Entry {
    Bytes id;
    symmetric::SessionKey key;
  };

  const symmetric::SessionKey* find(const Bytes& id) const;

  kem::KemSecretKey sk_;
  std::size_t capacity_;
  std::size_t decapsulations_ = 0;
  std::deque<Entry> cache_;
};

}  // namespace pqe::envelope
