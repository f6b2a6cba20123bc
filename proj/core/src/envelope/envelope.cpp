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

#include "pqe/envelope/envelope.hpp"

#include <algorithm>

namespace pqe::envelope {
namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // Overlongs, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10ffff ||
        (cp >= 0xd800 && cp <= 0xdfff)) {
      return false;
    }
    i += len;
  }
  return true;
}

bool valid_name(std::string_view name) {
  return !name.empty() && name.size() <= kMaxNameSize && valid_utf8(name);
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  bool take(std::size_t n, ByteView& out) {
    if (in_.size() - pos_ < n) return false;
    out = in_.subspan(pos_, n);
    pos_ += n;
    return true;
  }
  bool u8(std::uint8_t& v) {
    ByteView b;
    if (!take(1, b)) return false;
    v = b[0];
    return true;
  }
  bool u32(std::uint32_t& v) {
    ByteView b;
    if (!take(4, b)) return false;
    v = 0;
    for (auto x : b) v = (v << 8) | x;
    return true;
  }
  bool u64(std::uint64_t& v) {
    ByteView b;
    if (!take(8, b)) return false;
    v = 0;
    for (auto x : b) v = (v << 8) | x;
    return true;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

void append_header(Bytes& out, const EnvelopeHeader& h) {
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(h.version);
  out.push_back(static_cast<std::uint8_t>(h.sender.size()));
  out.insert(out.end(), h.sender.begin(), h.sender.end());
  out.push_back(static_cast<std::uint8_t>(h.recipient.size()));
  out.insert(out.end(), h.recipient.begin(), h.recipient.end());
  put_u64(out, h.seq);
}

}  // namespace

std::string_view to_string(OpenFailure failure) {
  switch (failure) {
    case OpenFailure::kReplay:
      return "Replay";
    case OpenFailure::kAuth:
      return "Auth";
    case OpenFailure::kMalformed:
      return "Malformed";
  }
  return "Unknown";
}

bool header_is_valid(const EnvelopeHeader& header) {
  return (header.version == kVersionV1 || header.version == kVersionV2) && valid_name(header.sender) &&
         valid_name(header.recipient);
}

symmetric::DerivationMode derivation_mode(std::uint8_t version) {
  switch (version) {
    case kVersionV1:
      return symmetric::DerivationMode::kV1RawHash;
    case kVersionV2:
      return symmetric::DerivationMode::kV2ContextBound;
    default:
      throw EnvelopeError("unsupported envelope version " + std::to_string(version));
  }
}

Bytes header_aad(const EnvelopeHeader& header) {
  Bytes aad;
  aad.reserve(kMagic.size() + 3 + header.sender.size() + header.recipient.size() + 8);
  append_header(aad, header);
  return aad;
}

symmetric::SessionKey derive_envelope_key(const kem::SharedSecret& ss, const EnvelopeHeader& header) {
  auto mode = derivation_mode(header.version);
  Bytes context;
  if (mode == symmetric::DerivationMode::kV2ContextBound) {
    context = symmetric::v2_context(header.sender, header.recipient, header.version);
  }
  return symmetric::derive_session_key(ss, mode, context);
}

Bytes encode_envelope(const Envelope& env) {
  if (!header_is_valid(env.header)) throw EnvelopeError("invalid envelope header");
  if (env.ciphertext.size() > kMaxPlaintextSize) throw EnvelopeError("envelope ciphertext too large");
  Bytes out;
  out.reserve(encoded_size(env.header.sender.size(), env.header.recipient.size(), env.ciphertext.size()));
  append_header(out, env.header);
  auto ct = env.kem_ct.view();
  out.insert(out.end(), ct.begin(), ct.end());
  out.insert(out.end(), env.nonce.begin(), env.nonce.end());
  put_u32(out, static_cast<std::uint32_t>(env.ciphertext.size()));
  out.insert(out.end(), env.ciphertext.begin(), env.ciphertext.end());
  out.insert(out.end(), env.tag.begin(), env.tag.end());
  return out;
}

Expected<Envelope, Malformed> decode_envelope(ByteView bytes) {
  auto fail = [](const char* why) { return unexpected(Malformed{why}); };
  Reader r(bytes);
  ByteView magic;
  if (!r.take(kMagic.size(), magic)) return fail("truncated magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) return fail("bad magic");

  EnvelopeHeader h;
  std::uint8_t len = 0;
  ByteView field;
  if (!r.u8(h.version)) return fail("truncated version");
  if (h.version != kVersionV1 && h.version != kVersionV2) return fail("unsupported version");
  if (!r.u8(len) || !r.take(len, field)) return fail("truncated sender");
  h.sender = pqe::to_string(field);
  if (!r.u8(len) || !r.take(len, field)) return fail("truncated recipient");
  h.recipient = pqe::to_string(field);
  if (!valid_name(h.sender) || !valid_name(h.recipient)) return fail("bad name");
  if (!r.u64(h.seq)) return fail("truncated seq");

  ByteView kem_ct, nonce, tag;
  std::uint32_t ct_len = 0;
  if (!r.take(kem::kCiphertextSize, kem_ct)) return fail("truncated KEM ciphertext");
  if (!r.take(symmetric::kNonceSize, nonce)) return fail("truncated nonce");
  if (!r.u32(ct_len)) return fail("truncated length");
  if (ct_len > kMaxPlaintextSize) return fail("ciphertext over size cap");
  if (!r.take(ct_len, field)) return fail("truncated ciphertext");
  if (!r.take(symmetric::kTagSize, tag)) return fail("truncated tag");
  if (r.remaining() != 0) return fail("trailing bytes");

  Envelope env{std::move(h), kem::KemCiphertext(kem_ct), {}, Bytes(field.begin(), field.end()), {}};
  std::copy(nonce.begin(), nonce.end(), env.nonce.begin());
  std::copy(tag.begin(), tag.end(), env.tag.begin());
  return env;
}

Envelope hybrid_seal(const kem::KemPublicKey& recipient_pk, const EnvelopeHeader& header, ByteView plaintext,
                     EntropySource& rng) {
  if (!header_is_valid(header)) throw EnvelopeError("invalid envelope header");
  if (plaintext.size() > kMaxPlaintextSize) throw EnvelopeError("plaintext exceeds 1 MiB");

  auto encapsulation = kem::kem_encapsulate(recipient_pk, rng);
  auto key = derive_envelope_key(encapsulation.shared_secret, header);
  auto sealed = symmetric::aead_seal(key, symmetric::random_nonce(rng), plaintext, header_aad(header));
  return Envelope{header, encapsulation.ciphertext, sealed.nonce, std::move(sealed.ciphertext), sealed.tag};
}

Expected<Bytes, OpenFailure> hybrid_open(const kem::KemSecretKey& recipient_sk, const Envelope& env,
                                         ReplayWindow& window) {
  if (!header_is_valid(env.header)) return unexpected(OpenFailure::kMalformed);
  if (!window.would_accept(env.header.seq)) return unexpected(OpenFailure::kReplay);

  auto ss = kem::kem_decapsulate(recipient_sk, env.kem_ct);
  auto key = derive_envelope_key(ss, env.header);
  auto opened =
      symmetric::aead_open(key, symmetric::AeadSealed{env.nonce, env.ciphertext, env.tag}, header_aad(env.header));
  if (!opened) return unexpected(OpenFailure::kAuth);
  window.mark(env.header.seq);
  return std::move(opened).value();
}

}  // namespace pqe::envelope
