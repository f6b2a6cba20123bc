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

#include <gtest/gtest.h>
#include <sys/stat.h>

#include "pqe/client/keystore.hpp"
#include "pqe/symmetric/symmetric.hpp"
#include "test_support.hpp"

namespace pqe::client {
namespace {

using pqe::testing::read_text;
using pqe::testing::TempDir;
using pqe::testing::write_text;

TEST(Armor, RoundTripAndShape) {
  Bytes data(1184);
  system_entropy().fill(data);
  std::string armor = encode_armor(kPublicKeyLabel, data);
  EXPECT_EQ(armor.rfind("-----BEGIN PQE KYBER768 PUBLIC KEY-----\n", 0), 0u);
  EXPECT_NE(armor.find("\n-----END PQE KYBER768 PUBLIC KEY-----\n"), std::string::npos);
  std::istringstream lines(armor);
  std::string line;
  while (std::getline(lines, line)) EXPECT_LE(line.size(), 64u);
  auto back = decode_armor(kPublicKeyLabel, armor);
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, data);
}

TEST(Armor, RejectsWrongLabelAndDamage) {
  std::string armor = encode_armor(kPrivateKeyLabel, Bytes(10, 1));
  EXPECT_FALSE(decode_armor(kPublicKeyLabel, armor));
  EXPECT_FALSE(decode_armor(kPrivateKeyLabel, armor.substr(0, armor.size() - 20)));
  std::string bad = armor;
  bad[armor.find('\n') + 1] = '*';
  EXPECT_FALSE(decode_armor(kPrivateKeyLabel, bad));
}

TEST(Fingerprint, HexAndDisplay) {
  Bytes pk(1184, 0);
  std::string fp = fingerprint(pk);
  EXPECT_EQ(fp.size(), 64u);
  EXPECT_EQ(fp, to_hex(symmetric::sha256(pk)));
  EXPECT_EQ(fingerprint_display("0123456789abcdef0011"), "0123 4567 89ab cdef");
}

TEST(KeyStore, FreshDirectoryCreatesBothFiles) {
  TempDir dir;
  auto id = init_identity("alice", dir.path());
  EXPECT_TRUE(id.generated);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "alice_pub.pem"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "alice_priv.pem"));
  struct stat st {};
  ASSERT_EQ(::stat((dir.path() / "alice_priv.pem").c_str(), &st), 0);
  EXPECT_EQ(st.st_mode & 0777, 0600u);
  EXPECT_EQ(id.fingerprint, fingerprint(id.keys.public_key.view()));
}

TEST(KeyStore, SecondRunLoadsIdenticalKeys) {
  TempDir dir;
  auto first = init_identity("alice", dir.path());
  std::string priv_before = read_text(dir.path() / "alice_priv.pem");
  auto second = init_identity("alice", dir.path());
  EXPECT_FALSE(second.generated);
  EXPECT_TRUE(first.keys.public_key == second.keys.public_key);
  EXPECT_TRUE(first.keys.secret_key == second.keys.secret_key);
  EXPECT_EQ(read_text(dir.path() / "alice_priv.pem"), priv_before);
}

TEST(KeyStore, TruncatedPrivateKeyNamesFile) {
  TempDir dir;
  init_identity("alice", dir.path());
  auto priv = dir.path() / "alice_priv.pem";
  std::string text = read_text(priv);
  write_text(priv, text.substr(0, text.size() / 2));
  try {
    init_identity("alice", dir.path());
    FAIL() << "expected KeyStoreError";
  } catch (const KeyStoreError& e) {
    EXPECT_NE(std::string(e.what()).find(priv.string()), std::string::npos) << e.what();
  }
  // The damaged file is left alone rather than regenerated.
  EXPECT_EQ(read_text(priv), text.substr(0, text.size() / 2));
}

TEST(KeyStore, CorruptPublicKeyNamesFile) {
  TempDir dir;
  init_identity("alice", dir.path());
  auto pub = dir.path() / "alice_pub.pem";
  write_text(pub, encode_armor(kPublicKeyLabel, Bytes(1183, 0)));
  try {
    init_identity("alice", dir.path());
    FAIL() << "expected KeyStoreError";
  } catch (const KeyStoreError& e) {
    EXPECT_NE(std::string(e.what()).find(pub.string()), std::string::npos) << e.what();
  }
}

TEST(KeyStore, MissingHalfRefusesToStart) {
  TempDir dir;
  init_identity("alice", dir.path());
  std::filesystem::remove(dir.path() / "alice_pub.pem");
  EXPECT_THROW(init_identity("alice", dir.path()), KeyStoreError);
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "alice_pub.pem"));
}

TEST(KeyStore, MismatchedPairRejected) {
  TempDir dir;
  init_identity("alice", dir.path());
  init_identity("bob", dir.path());
  std::filesystem::copy_file(dir.path() / "bob_pub.pem", dir.path() / "alice_pub.pem",
                             std::filesystem::copy_options::overwrite_existing);
  EXPECT_THROW(init_identity("alice", dir.path()), KeyStoreError);
}

TEST(KeyStore, LoadPublicKeyFile) {
  TempDir dir;
  auto id = init_identity("bob", dir.path());
  EXPECT_TRUE(load_public_key(dir.path() / "bob_pub.pem") == id.keys.public_key);
  EXPECT_THROW(load_public_key(dir.path() / "missing.pem"), KeyStoreError);
}

}  // namespace
}  // namespace pqe::client
