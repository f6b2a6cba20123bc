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

#include "pqe/common/bytes.hpp"
#include "pqe/relay/directory.hpp"

namespace pqe::relay {
namespace {

using wire::ErrorCode;
using wire::FrameType;

const std::string kKey = base64_encode(Bytes(wire::kPublicKeySize, 7));

struct DirectoryTest : ::testing::Test {
  std::vector<std::string> log;
  Directory dir{[this](std::string_view l) { log.emplace_back(l); }, 3};

  std::vector<Outbound> reg(ConnectionId c, const std::string& name) { return dir.handle(c, wire::make_register(name)); }

  bool logged(const std::string& line) const { return std::find(log.begin(), log.end(), line) != log.end(); }
};

TEST_F(DirectoryTest, RegisterAcknowledges) {
  auto out = reg(1, "alice");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].to, 1u);
  EXPECT_EQ(out[0].frame.type, FrameType::kRegisterOk);
  EXPECT_TRUE(logged("Registered alice"));
  EXPECT_TRUE(dir.is_online("alice"));
  EXPECT_EQ(dir.name_of(1), "alice");
}

TEST_F(DirectoryTest, RegisterErrors) {
  reg(1, "alice");
  auto taken = reg(2, "alice");
  ASSERT_EQ(taken.size(), 1u);
  EXPECT_EQ(taken[0].frame.code, ErrorCode::kNameTaken);
  auto twice = reg(1, "alice2");
  EXPECT_EQ(twice[0].frame.code, ErrorCode::kMalformed);
  auto bad = reg(3, "Bad Name");
  EXPECT_EQ(bad[0].frame.code, ErrorCode::kMalformed);
}

TEST_F(DirectoryTest, NameFreedOnDisconnect) {
  reg(1, "alice");
  dir.disconnect(1);
  EXPECT_TRUE(logged("Disconnected alice"));
  EXPECT_FALSE(dir.is_online("alice"));
  auto out = reg(2, "alice");
  EXPECT_EQ(out[0].frame.type, FrameType::kRegisterOk);
}

TEST_F(DirectoryTest, KeyPublishAndFetch) {
  reg(1, "bob");
  EXPECT_TRUE(dir.handle(1, wire::make_publish_key(kKey)).empty());
  reg(2, "alice");
  auto out = dir.handle(2, wire::make_fetch_key("bob"));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].frame.type, FrameType::kKey);
  EXPECT_EQ(out[0].frame.peer, "bob");
  EXPECT_EQ(out[0].frame.payload, kKey);
}

TEST_F(DirectoryTest, FetchUnknownPeer) {
  reg(1, "alice");
  auto out = dir.handle(1, wire::make_fetch_key("bob"));
  EXPECT_EQ(out[0].frame.code, ErrorCode::kUnknownPeer);
  EXPECT_EQ(out[0].frame.peer, "bob");
}

TEST_F(DirectoryTest, PublishValidation) {
  EXPECT_EQ(dir.handle(1, wire::make_publish_key(kKey))[0].frame.code, ErrorCode::kMalformed);
  reg(1, "bob");
  EXPECT_EQ(dir.handle(1, wire::make_publish_key("***"))[0].frame.code, ErrorCode::kMalformed);
  EXPECT_EQ(dir.handle(1, wire::make_publish_key(base64_encode(Bytes(100))))[0].frame.code, ErrorCode::kMalformed);
}

TEST_F(DirectoryTest, RelayToOnlinePeer) {
  reg(1, "alice");
  reg(2, "bob");
  auto out = dir.handle(1, wire::make_send("bob", "QUJD"));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].to, 2u);
  EXPECT_EQ(out[0].frame.type, FrameType::kDeliver);
  EXPECT_EQ(out[0].frame.peer, "alice");
  EXPECT_EQ(out[0].frame.payload, "QUJD");
  EXPECT_TRUE(logged("Relayed message from alice to bob"));
  EXPECT_EQ(dir.counters().relayed, 1u);
}

TEST_F(DirectoryTest, SendErrors) {
  EXPECT_EQ(dir.handle(1, wire::make_send("bob", "QUJD"))[0].frame.code, ErrorCode::kMalformed);
  reg(1, "alice");
  EXPECT_EQ(dir.handle(1, wire::make_send("nobody", "QUJD"))[0].frame.code, ErrorCode::kUnknownPeer);
  reg(2, "bob");
  EXPECT_EQ(dir.handle(1, wire::make_send("bob", "not base64!"))[0].frame.code, ErrorCode::kMalformed);
}

TEST_F(DirectoryTest, OfflineQueueFlushesInOrderOnRegister) {
  reg(1, "alice");
  reg(2, "bob");
  dir.disconnect(2);
  for (const char* p : {"AAAA", "BBBB"}) EXPECT_TRUE(dir.handle(1, wire::make_send("bob", p)).empty());
  EXPECT_EQ(dir.queued_for("bob"), 2u);
  auto out = reg(3, "bob");
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].frame.type, FrameType::kRegisterOk);
  EXPECT_EQ(out[1].frame.payload, "AAAA");
  EXPECT_EQ(out[2].frame.payload, "BBBB");
  EXPECT_EQ(out[2].frame.peer, "alice");
  EXPECT_EQ(dir.queued_for("bob"), 0u);
  EXPECT_TRUE(logged("Delivered 2 queued message(s) to bob"));
}

TEST_F(DirectoryTest, QueueOverflowDropsOldestAndNotifiesSender) {
  reg(1, "alice");
  reg(2, "bob");
  dir.disconnect(2);
  for (const char* p : {"AAAA", "BBBB", "CCCC"}) dir.handle(1, wire::make_send("bob", p));
  auto out = dir.handle(1, wire::make_send("bob", "DDDD"));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].to, 1u);
  EXPECT_EQ(out[0].frame.code, ErrorCode::kQueueFull);
  EXPECT_EQ(dir.counters().dropped, 1u);
  auto flushed = reg(3, "bob");
  ASSERT_EQ(flushed.size(), 4u);
  EXPECT_EQ(flushed[1].frame.payload, "BBBB");
  EXPECT_EQ(flushed[3].frame.payload, "DDDD");
}

TEST_F(DirectoryTest, PayloadForwardedVerbatim) {
  reg(1, "alice");
  reg(2, "bob");
  std::string payload = base64_encode(Bytes(5000, 0xab));
  auto out = dir.handle(1, wire::make_send("bob", payload));
  EXPECT_EQ(out[0].frame.payload, payload);
}

TEST_F(DirectoryTest, UnexpectedFrameTypesRejected) {
  reg(1, "alice");
  EXPECT_EQ(dir.handle(1, wire::make_deliver("x", "QUJD"))[0].frame.code, ErrorCode::kMalformed);
  EXPECT_EQ(dir.handle(1, wire::make_register_ok("alice"))[0].frame.code, ErrorCode::kMalformed);
  EXPECT_EQ(dir.reject(1, "garbage")[0].frame.code, ErrorCode::kMalformed);
}

}  // namespace
}  // namespace pqe::relay
