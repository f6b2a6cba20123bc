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

#include "agent_fixture.hpp"
#include "line_proxy.hpp"
#include "pqe/envelope/envelope.hpp"
#include "pqe/wire/frame.hpp"

namespace pqe::client {
namespace {

using pqe::testing::agent_config;
using pqe::testing::eventually;
using pqe::testing::EventLog;
using pqe::testing::LineProxy;
using pqe::testing::RelayHarness;
using pqe::testing::TempDir;

using Dir = LineProxy::Direction;

std::string random_text(std::size_t n) {
  Bytes raw(n);
  system_entropy().fill(raw);
  std::string s(n, 'x');
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<char>('a' + raw[i] % 26);
  return s;
}

// Applies `fn` to the decoded envelope bytes of DELIVER frames headed to the client.
LineProxy::Transform on_deliver(std::function<void(Bytes&)> fn) {
  return [fn](Dir dir, const std::string& line) -> std::optional<std::string> {
    if (dir != Dir::kToClient) return line;
    auto f = wire::decode_frame(line);
    if (!f || f->type != wire::FrameType::kDeliver) return line;
    auto raw = base64_decode(f->payload);
    fn(*raw);
    f->payload = base64_encode(*raw);
    return wire::encode_frame(*f);
  };
}

struct AgentTest : ::testing::Test {
  TempDir keys;
  RelayHarness relay;

  std::unique_ptr<ClientAgent> make(const std::string& name, std::uint16_t port = 0,
                                    std::function<void(AgentConfig&)> tweak = {}) {
    auto cfg = agent_config(name, port ? port : relay.port(), keys.path());
    if (tweak) tweak(cfg);
    return std::make_unique<ClientAgent>(cfg);
  }
};

TEST_F(AgentTest, ChatTranscript) {
  auto bob = make("bob");
  EventLog bob_events;
  bob_events.attach(*bob);
  bob->start();
  auto alice = make("alice");
  alice->start();

  EXPECT_EQ(alice->send_message("bob", "Hii bob"), 1u);
  ASSERT_TRUE(bob_events.wait_inbound(1));
  EXPECT_EQ(bob_events.display_lines(), std::vector<std::string>{"[alice] Hii bob"});

  EXPECT_TRUE(eventually([&] { return relay.log.contains_line("Relayed message from alice to bob"); }));
  EXPECT_TRUE(relay.log.contains_line("Registered alice"));
  EXPECT_TRUE(relay.log.contains_line("Registered bob"));
  EXPECT_EQ(relay.wire_text().find("Hii bob"), std::string::npos);
}

TEST_F(AgentTest, BidirectionalWithSequenceNumbers) {
  auto alice = make("alice"), bob = make("bob");
  EventLog ae, be;
  ae.attach(*alice);
  be.attach(*bob);
  alice->start();
  bob->start();
  EXPECT_EQ(alice->send_message("bob", "one"), 1u);
  EXPECT_EQ(alice->send_message("bob", "two"), 2u);
  EXPECT_EQ(bob->send_message("alice", "back"), 1u);
  ASSERT_TRUE(be.wait_inbound(2));
  ASSERT_TRUE(ae.wait_inbound(1));
  auto in = be.inbound();
  EXPECT_EQ(in[0].text, "one");
  EXPECT_EQ(in[0].seq, 1u);
  EXPECT_EQ(in[1].text, "two");
  EXPECT_EQ(ae.inbound()[0].text, "back");
}

TEST_F(AgentTest, WireNeverCarriesPlaintextOrSecretKeys) {
  auto alice = make("alice"), bob = make("bob");
  EventLog be;
  be.attach(*bob);
  alice->start();
  bob->start();
  std::vector<std::string> sent;
  for (int i = 0; i < 100; ++i) {
    sent.push_back(random_text(24 + i % 40));
    alice->send_message("bob", sent.back());
  }
  ASSERT_TRUE(be.wait_inbound(100, std::chrono::milliseconds(20000)));
  std::string wire = relay.wire_text();
  for (const auto& m : sent) EXPECT_EQ(wire.find(m), std::string::npos);
  for (const auto* agent : {alice.get(), bob.get()}) {
    const auto& sk = agent->identity().keys.secret_key;
    // The secret key's distinctive tail (H(ek) || z) in either encoding.
    Bytes tail(sk.view().end() - 64, sk.view().end());
    EXPECT_EQ(wire.find(base64_encode(sk.view()).substr(0, 64)), std::string::npos);
    EXPECT_EQ(wire.find(to_hex(tail)), std::string::npos);
  }
  auto in = be.inbound();
  for (std::size_t i = 0; i < sent.size(); ++i) EXPECT_EQ(in[i].text, sent[i]);
}

TEST_F(AgentTest, UnknownPeerBeforePublish) {
  auto alice = make("alice");
  alice->start();
  try {
    alice->send_message("bob", "anyone?");
    FAIL();
  } catch (const SendError& e) {
    EXPECT_EQ(e.kind(), SendError::Kind::kUnknownPeer);
  }
  EXPECT_THROW(alice->resolve_peer("bob"), SendError);
}

TEST_F(AgentTest, EmptyAndInvalidInputNotSent) {
  auto alice = make("alice"), bob = make("bob");
  alice->start();
  bob->start();
  try {
    alice->send_message("bob", "");
    FAIL();
  } catch (const SendError& e) {
    EXPECT_EQ(e.kind(), SendError::Kind::kInvalid);
  }
  EXPECT_THROW(alice->send_message("Not A Name", "x"), SendError);
  EXPECT_EQ(relay.wire_text().find("\"SEND\""), std::string::npos);
}

TEST_F(AgentTest, ResolvePinsOnFirstSight) {
  auto alice = make("alice"), bob = make("bob");
  alice->start();
  bob->start();
  auto rec = alice->resolve_peer("bob");
  EXPECT_EQ(rec.fingerprint, bob->identity().fingerprint);
  auto pins = alice->peers();
  ASSERT_EQ(pins.size(), 1u);
  EXPECT_EQ(pins[0].name, "bob");
}

TEST_F(AgentTest, KeySubstitutionBlocksSending) {
  auto bob = make("bob");
  bob->start();
  auto mallory_key = kem::kem_generate_keypair(system_entropy()).public_key;

  LineProxy proxy(relay.port());
  auto alice = make("alice", proxy.port());
  alice->start();
  ASSERT_NO_THROW(alice->send_message("bob", "before"));
  ASSERT_TRUE(eventually([&] {
    for (const auto& [dir, line] : proxy.captured()) {
      if (dir == Dir::kToRelay && line.find("\"SEND\"") != std::string::npos) return true;
    }
    return false;
  }));

  std::atomic<int> sends_after{0};
  proxy.set_transform([&](Dir dir, const std::string& line) -> std::optional<std::string> {
    auto f = wire::decode_frame(line);
    if (dir == Dir::kToClient && f && f->type == wire::FrameType::kKey) {
      return wire::encode_frame(wire::make_key(f->peer, base64_encode(mallory_key.view())));
    }
    if (dir == Dir::kToRelay && f && f->type == wire::FrameType::kSend) ++sends_after;
    return line;
  });

  try {
    alice->send_message("bob", "after");
    FAIL() << "expected FINGERPRINT_MISMATCH";
  } catch (const SendError& e) {
    EXPECT_EQ(e.kind(), SendError::Kind::kFingerprintMismatch);
    EXPECT_EQ(e.pinned_fingerprint(), bob->identity().fingerprint);
    EXPECT_EQ(e.offered_fingerprint(), fingerprint(mallory_key.view()));
    EXPECT_NE(std::string(e.what()).find("FINGERPRINT_MISMATCH"), std::string::npos);
  }
  EXPECT_THROW(alice->send_message("bob", "again"), SendError);
  EXPECT_EQ(sends_after.load(), 0);
  auto pins = alice->peers();
  ASSERT_EQ(pins.size(), 1u);
  EXPECT_EQ(pins[0].fingerprint, bob->identity().fingerprint);
  ASSERT_TRUE(pins[0].pending);

  // Explicit re-pin accepts the offered key.
  EXPECT_TRUE(alice->repin("bob"));
  EXPECT_NO_THROW(alice->send_message("bob", "after repin"));
  EXPECT_TRUE(eventually([&] { return sends_after.load() == 1; }));
  EXPECT_EQ(alice->peers()[0].fingerprint, fingerprint(mallory_key.view()));
}

TEST_F(AgentTest, PinFileOverridesFirstFetch) {
  auto bob = make("bob");
  bob->start();
  TempDir other;
  auto decoy = init_identity("bob", other.path());
  auto alice = make("alice", 0, [&](AgentConfig& c) { c.pin_files = {other.path() / "bob_pub.pem"}; });
  alice->start();
  try {
    alice->send_message("bob", "hi");
    FAIL();
  } catch (const SendError& e) {
    EXPECT_EQ(e.kind(), SendError::Kind::kFingerprintMismatch);
    EXPECT_EQ(e.pinned_fingerprint(), decoy.fingerprint);
  }
}

TEST_F(AgentTest, TamperedDeliveryYieldsAuthNotice) {
  auto alice = make("alice");
  alice->start();
  LineProxy proxy(relay.port(), on_deliver([](Bytes& env) { env[env.size() - 30] ^= 0x01; }));
  auto bob = make("bob", proxy.port());
  EventLog be;
  be.attach(*bob);
  bob->start();
  alice->send_message("bob", "Hii bob");
  ASSERT_TRUE(be.wait_inbound(1));
  auto e = be.inbound()[0];
  EXPECT_FALSE(e.text);
  EXPECT_EQ(e.failure, "Auth");
  EXPECT_EQ(format_event(e), "! rejected message from alice: Auth failure");
}

TEST_F(AgentTest, TamperedKemCiphertextYieldsAuthNotice) {
  auto alice = make("alice");
  alice->start();
  // Byte 30 of a alice->bob envelope lies inside the KEM ciphertext.
  LineProxy proxy(relay.port(), on_deliver([](Bytes& env) { env[30] ^= 0x80; }));
  auto bob = make("bob", proxy.port());
  EventLog be;
  be.attach(*bob);
  bob->start();
  alice->send_message("bob", "Hii bob");
  ASSERT_TRUE(be.wait_inbound(1));
  EXPECT_EQ(be.inbound()[0].failure, "Auth");
}

TEST_F(AgentTest, DuplicatedDeliveryYieldsReplayNotice) {
  auto alice = make("alice");
  alice->start();
  LineProxy proxy(relay.port(), nullptr);
  auto bob = make("bob", proxy.port());
  EventLog be;
  be.attach(*bob);
  bob->start();

  std::string captured;
  proxy.set_transform([&](Dir dir, const std::string& line) -> std::optional<std::string> {
    if (dir == Dir::kToClient && line.find("\"DELIVER\"") != std::string::npos) {
      captured = line;
      return line + "\n" + line;
    }
    return line;
  });
  alice->send_message("bob", "only once");
  ASSERT_TRUE(be.wait_inbound(2));
  auto in = be.inbound();
  EXPECT_EQ(in[0].text, "only once");
  EXPECT_EQ(in[1].failure, "Replay");
  EXPECT_FALSE(in[1].text);
}

TEST_F(AgentTest, GarbageDeliveryYieldsMalformedNotice) {
  auto alice = make("alice");
  alice->start();
  LineProxy proxy(relay.port(), on_deliver([](Bytes& env) { env.resize(40); }));
  auto bob = make("bob", proxy.port());
  EventLog be;
  be.attach(*bob);
  bob->start();
  alice->send_message("bob", "x");
  ASSERT_TRUE(be.wait_inbound(1));
  EXPECT_EQ(be.inbound()[0].failure, "Malformed");
}

TEST_F(AgentTest, ReconnectsAndReregistersAfterDrop) {
  auto alice = make("alice");
  alice->start();
  LineProxy proxy(relay.port());
  auto bob = make("bob", proxy.port());
  EventLog be;
  be.attach(*bob);
  bob->start();

  proxy.drop_connections();
  ASSERT_TRUE(eventually([&] { return bob->status().reconnects >= 1 && bob->status().registered; }));
  EXPECT_TRUE(eventually([&] {
    try {
      alice->send_message("bob", "still there?");
      return true;
    } catch (const SendError&) {
      return false;
    }
  }));
  ASSERT_TRUE(be.wait_inbound(1));
  EXPECT_EQ(be.inbound()[0].text, "still there?");
}

TEST_F(AgentTest, OfflineRecipientReceivesQueuedMessagesOnReturn) {
  {
    auto bob = make("bob");
    bob->start();
  }
  ASSERT_TRUE(eventually([&] { return relay.log.contains_line("Disconnected bob"); }));
  auto alice = make("alice");
  alice->start();
  alice->send_message("bob", "while you were out");
  alice->send_message("bob", "second");

  auto bob = make("bob");
  EventLog be;
  be.attach(*bob);
  bob->start();
  ASSERT_TRUE(be.wait_inbound(2));
  EXPECT_EQ(be.display_lines(), (std::vector<std::string>{"[alice] while you were out", "[alice] second"}));
}

TEST_F(AgentTest, SequenceResumesAfterRestart) {
  auto bob = make("bob");
  EventLog be;
  be.attach(*bob);
  bob->start();
  {
    auto alice = make("alice");
    alice->start();
    for (int i = 0; i < 3; ++i) alice->send_message("bob", "m");
  }
  auto alice = make("alice");
  alice->start();
  EXPECT_EQ(alice->send_message("bob", "after restart"), 4u);
  ASSERT_TRUE(be.wait_inbound(4));
  EXPECT_EQ(be.inbound()[3].text, "after restart");
  EXPECT_FALSE(be.inbound()[3].failure);
}

TEST_F(AgentTest, NameTakenFailsStart) {
  auto first = make("alice");
  first->start();
  TempDir other;
  auto cfg = agent_config("alice", relay.port(), other.path());
  ClientAgent second(cfg);
  EXPECT_THROW(second.start(), AgentError);
}

TEST_F(AgentTest, UnreachableRelayFailsStartWithinTimeout) {
  auto cfg = agent_config("alice", 1, keys.path());
  cfg.request_timeout = std::chrono::milliseconds(300);
  ClientAgent agent(cfg);
  EXPECT_THROW(agent.start(), AgentError);
}

TEST_F(AgentTest, AmortizedRekeyAndV1Interoperate) {
  auto alice = make("alice", 0, [](AgentConfig& c) {
    c.rekey_every = 4;
    c.envelope_version = envelope::kVersionV1;
  });
  auto bob = make("bob");
  EventLog be;
  be.attach(*bob);
  alice->start();
  bob->start();
  for (int i = 0; i < 10; ++i) alice->send_message("bob", "msg " + std::to_string(i));
  ASSERT_TRUE(be.wait_inbound(10));
  auto in = be.inbound();
  for (int i = 0; i < 10; ++i) EXPECT_EQ(in[i].text, "msg " + std::to_string(i));
}

TEST_F(AgentTest, HistoryAndSubscribeWithHistory) {
  auto alice = make("alice"), bob = make("bob");
  alice->start();
  bob->start();
  alice->send_message("bob", "a");
  ASSERT_TRUE(eventually([&] { return bob->history().size() == 1; }));
  std::uint64_t id = 0;
  auto hist = bob->subscribe_with_history([](const ChatEvent&) {}, id);
  ASSERT_EQ(hist.size(), 1u);
  EXPECT_EQ(hist[0].text, "a");
  EXPECT_EQ(alice->history()[0].direction, EventDirection::kOutbound);
  bob->unsubscribe(id);
}

}  // namespace
}  // namespace pqe::client
