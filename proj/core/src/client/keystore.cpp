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

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pqe/client/keystore.hpp"

namespace pqe::client {
namespace fs = std::filesystem;
namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw KeyStoreError("cannot read key file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view contents, mode_t mode) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, mode);
  if (fd < 0) throw KeyStoreError("cannot create key file " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < contents.size()) {
    ssize_t n = ::write(fd, contents.data() + done, contents.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw KeyStoreError("cannot write key file " + path.string() + ": " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  ::fchmod(fd, mode);
  ::close(fd);
}

template <class Key>
Key parse_key(const fs::path& path, std::string_view label) {
  auto raw = decode_armor(label, read_file(path));
  if (!raw) throw KeyStoreError("corrupt key file " + path.string() + ": " + raw.error());
  try {
    Key key(*raw);
    secure_zero(raw->data(), raw->size());
    return key;
  } catch (const kem::InvalidKeyMaterial& e) {
    secure_zero(raw->data(), raw->size());
    throw KeyStoreError("corrupt key file " + path.string() + ": " + e.what());
  }
}

}  // namespace

fs::path public_key_path(const fs::path& key_dir, std::string_view name) {
  return key_dir / (std::string(name) + "_pub.pem");
}

fs::path private_key_path(const fs::path& key_dir, std::string_view name) {
  return key_dir / (std::string(name) + "_priv.pem");
}

kem::KemPublicKey load_public_key(const fs::path& path) { return parse_key<kem::KemPublicKey>(path, kPublicKeyLabel); }

Identity init_identity(std::string_view name, const fs::path& key_dir, EntropySource& rng) {
  const fs::path pub = public_key_path(key_dir, name);
  const fs::path priv = private_key_path(key_dir, name);
  std::error_code ec;
  const bool have_pub = fs::exists(pub, ec);
  const bool have_priv = fs::exists(priv, ec);

  if (!have_pub && !have_priv) {
    fs::create_directories(key_dir, ec);
    if (ec) throw KeyStoreError("cannot create key directory " + key_dir.string() + ": " + ec.message());
    auto keys = kem::kem_generate_keypair(rng);
    std::string priv_armor = encode_armor(kPrivateKeyLabel, keys.secret_key.view());
    write_file(priv, priv_armor, S_IRUSR | S_IWUSR);
    secure_zero(priv_armor.data(), priv_armor.size());
    write_file(pub, encode_armor(kPublicKeyLabel, keys.public_key.view()), S_IRUSR | S_IWUSR | S_IRGRP | S_IROTH);
    std::string fp = fingerprint(keys.public_key.view());
    return Identity{std::string(name), std::move(keys), std::move(fp), pub, priv, true};
  }
  if (!have_priv) throw KeyStoreError("missing private key file " + priv.string() + " (public key present)");
  if (!have_pub) throw KeyStoreError("missing public key file " + pub.string() + " (private key present)");

  auto sk = parse_key<kem::KemSecretKey>(priv, kPrivateKeyLabel);
  auto pk = parse_key<kem::KemPublicKey>(pub, kPublicKeyLabel);
  if (!(sk.public_key() == pk)) {
    throw KeyStoreError("key file " + pub.string() + " does not match private key " + priv.string());
  }
  std::string fp = fingerprint(pk.view());
  return Identity{std::string(name), kem::KemKeyPair{std::move(pk), std::move(sk)}, std::move(fp), pub, priv, false};
}

}  // namespace pqe::client
