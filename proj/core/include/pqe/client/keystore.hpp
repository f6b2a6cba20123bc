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

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pqe/common/bytes.hpp"
#include "pqe/common/expected.hpp"
#include "pqe/kem/entropy.hpp"
#include "pqe/kem/kem.hpp"

namespace pqe::client {

inline constexpr std::string_view kPublicKeyLabel = "PQE KYBER768 PUBLIC KEY";
inline constexpr std::string_view kPrivateKeyLabel = "PQE KYBER768 PRIVATE KEY";

/// "-----BEGIN <label>-----", base64 in 64-column lines, "-----END <label>-----".
std::string encode_armor(std::string_view label, ByteView data);
Expected<Bytes, std::string> decode_armor(std::string_view label, std::string_view text);

/// Lowercase hex SHA-256 of the public key bytes.
std::string fingerprint(ByteView public_key);

/// First 16 hex characters in groups of four: "1a2b 3c4d 5e6f 7a8b".
std::string fingerprint_display(std::string_view fingerprint_hex);

class KeyStoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Identity {
  std::string name;
  kem::KemKeyPair keys;
  std::string fingerprint;
  std::filesystem::path public_key_path;
  std::filesystem::path private_key_path;
  bool generated = false;
};

std::filesystem::path public_key_path(const std::filesystem::path& key_dir, std::string_view name);
std::filesystem::path private_key_path(const std::filesystem::path& key_dir, std::string_view name);

/// Loads <name>_pub.pem / <name>_priv.pem from key_dir, generating both if
/// neither exists. Never overwrites: a missing half, unreadable file,
/// corrupt armor or a public/private mismatch throws KeyStoreError naming
/// the offending file.
Identity init_identity(std::string_view name, const std::filesystem::path& key_dir,
                       EntropySource& rng = system_entropy());

/// Reads a public key armor file (for --pin-file).
kem::KemPublicKey load_public_key(const std::filesystem::path& path);

}  // namespace pqe::client
