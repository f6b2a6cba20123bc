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

#include "pqe/envelope/session.hpp"

#include <algorithm>

namespace pqe::envelope {
namespace {

// Cache identity: the KEM ciphertext plus everything the key derivation
// binds, so a cached key is only reused for the exact same derivation input.
Bytes cache_id(const Envelope& env) {
  Bytes id(env.kem_ct.view().begin(), env.kem_ct.view().end());
  id.push_back(env.header.version);
  id.push_back(static_cast<std::uint8_t>(env.header.sender.size()));
  id.insert(id.end(), env.header.sender.begin(), env.header.sender.end());
  id.push_back(static_cast<std::uint8_t>(env.header.recipient.size()));
  id.insert(id.end(), env.header.recipient.begin(), env.header.recipient.end());
  return id;
}

}  // namespace

EnvelopeSealer::EnvelopeSealer(std::uint32_t rekey_every) : rekey_every_(std::max<std::uint32_t>(rekey_every, 1)) {}

Envelope EnvelopeSealer::seal(const kem::KemPublicKey& recipient_pk, const EnvelopeHeader& header,
                              ByteView plaintext, EntropySource& rng) {
  if (rekey_every_ == 1) {
    ++encapsulations_;
    return hybrid_seal(recipient_pk, header, plaintext, rng);
  }
  if (!header_is_valid(header)) throw EnvelopeError("invalid envelope header");
  if (plaintext.size() > kMaxPlaintextSize) throw EnvelopeError("plaintext exceeds 1 MiB");

  auto it = by_recipient_.find(header.recipient);
  bool fresh = it == by_recipient_.end() || it->second.uses >= rekey_every_ || !(it->second.pk == recipient_pk) ||
               it->second.version != header.version || it->second.sender != header.sender;
  if (fresh) {
    auto encapsulation = kem::kem_encapsulate(recipient_pk, rng);
    ++encapsulations_;
    Cached entry{recipient_pk, header.version, header.sender, encapsulation.ciphertext,
                 derive_envelope_key(encapsulation.shared_secret, header), 0};
    if (it != by_recipient_.end()) by_recipient_.erase(it);
    it = by_recipient_.emplace(header.recipient, std::move(entry)).first;
  }
  ++it->second.uses;
  auto sealed = symmetric::aead_seal(it->second.key, symmetric::random_nonce(rng), plaintext, header_aad(header));
  return Envelope{header, it->second.ct, sealed.nonce, std::move(sealed.ciphertext), sealed.tag};
}

EnvelopeOpener::EnvelopeOpener(kem::KemSecretKey sk, std::size_t cache_capacity)
    : sk_(std::move(sk)), capacity_(cache_capacity) {}

const symmetric::SessionKey* EnvelopeOpener::find(const Bytes& id) const {
  for (const auto& e : cache_) {
    if (e.id == id) return &e.key;
  }
  return nullptr;
}

Expected<Bytes, OpenFailure> EnvelopeOpener::open(const Envelope& env, ReplayWindow& window) {
  if (capacity_ == 0) {
    ++decapsulations_;
    return hybrid_open(sk_, env, window);
  }
  if (!header_is_valid(env.header)) return unexpected(OpenFailure::kMalformed);
  if (!window.would_accept(env.header.seq)) return unexpected(OpenFailure::kReplay);

  Bytes id = cache_id(env);
  std::optional<symmetric::SessionKey> key;
  bool cached = false;
  if (const auto* hit = find(id)) {
    key.emplace(*hit);
    cached = true;
  } else {
    ++decapsulations_;
    key.emplace(derive_envelope_key(kem::kem_decapsulate(sk_, env.kem_ct), env.header));
  }
  auto opened =
      symmetric::aead_open(*key, symmetric::AeadSealed{env.nonce, env.ciphertext, env.tag}, header_aad(env.header));
  if (!opened) return unexpected(OpenFailure::kAuth);
  window.mark(env.header.seq);
  // Only keys that authenticated a message are remembered.
  if (!cached) {
    if (cache_.size() >= capacity_) cache_.pop_front();
    cache_.push_back(Entry{std::move(id), *key});
  }
  return std::move(opened).value();
}

}  // namespace pqe::envelope
