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

#include "pqe/client/console_api.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "agent_fixture.hpp"
#include "httplib.h"
#include "json.hpp"
#include "line_proxy.hpp"
#include "pqe/wire/frame.hpp"

namespace pqe::client {
namespace {

using nlohmann::json;
using pqe::testing::agent_config;
using pqe::testing::eventually;
using pqe::testing::EventLog;
using pqe::testing::LineProxy;
using pqe::testing::RelayHarness;
using pqe::testing::TempDir;

struct ConsoleApiTest : ::testing::Test {
  TempDir keys;
  RelayHarness relay;
  std::unique_ptr<LineProxy> proxy;
  std::unique_ptr<ClientAgent> alice, bob;
  std::unique_ptr<ConsoleApi> api;
  EventLog bob_events;

  void SetUp() override {
    proxy = std::make_unique<LineProxy>(relay.port());
    bob = std::make_unique<ClientAgent>(agent_config("bob", relay.port(), keys.path()));
    bob_events.attach(*bob);
    bob->start();
    alice = std::make_unique<ClientAgent>(agent_config("alice", proxy->port(), keys.path()));
    alice->start();
    ConsoleOptions o;
    o.token = "test-token";
    o.keepalive = std::chrono::milliseconds(100);
    api = std::make_unique<ConsoleApi>(*alice, o);
    api->start();
  }

  void TearDown() override {
    api->stop();
    alice.reset();
    bob.reset();
  }

  httplib::Client client(bool authorized = true) {
    httplib::Client c("127.0.0.1", api->port());
    c.set_read_timeout(10, 0);
    if (authorized) c.set_bearer_token_auth(api->token());
    return c;
  }

  httplib::Result send(const std::string& peer, const std::string& text) {
    return client().Post("/send", json{{"peer", peer}, {"text", text}}.dump(), "application/json");
  }
};

TEST_F(ConsoleApiTest, RequiresToken) {
  auto c = client(false);
  auto r = c.Get("/identity");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 401);
  EXPECT_EQ(json::parse(r->body)["error"], "UNAUTHORIZED");

  httplib::Client wrong("127.0.0.1", api->port());
  wrong.set_bearer_token_auth("test-tokem");
  EXPECT_EQ(wrong.Get("/identity")->status, 401);

  EXPECT_EQ(c.Get("/identity?token=test-token")->status, 200);
}

TEST_F(ConsoleApiTest, GeneratedTokenIsRandomHex) {
  ConsoleApi other(*alice);
  EXPECT_EQ(other.token().size(), 32u);
  EXPECT_EQ(other.token().find_first_not_of("0123456789abcdef"), std::string::npos);
}

TEST_F(ConsoleApiTest, IdentityReportsFingerprint) {
  auto r = client().Get("/identity");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  auto j = json::parse(r->body);
  EXPECT_EQ(j["name"], "alice");
  EXPECT_EQ(j["fingerprint"], alice->identity().fingerprint);
  EXPECT_EQ(j["fingerprint_display"], fingerprint_display(alice->identity().fingerprint));
}

TEST_F(ConsoleApiTest, SendDeliversAndReturnsSeq) {
  auto r = send("bob", "Hii bob");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(json::parse(r->body)["seq"], 1);
  ASSERT_TRUE(bob_events.wait_inbound(1));
  EXPECT_EQ(bob_events.display_lines()[0], "[alice] Hii bob");

  auto peers = json::parse(client().Get("/peers")->body);
  ASSERT_EQ(peers.size(), 1u);
  EXPECT_EQ(peers[0]["name"], "bob");
  EXPECT_EQ(peers[0]["fingerprint"], bob->identity().fingerprint);
}

TEST_F(ConsoleApiTest, SendErrors) {
  auto r = client().Post("/send", "not json", "application/json");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(send("bob", "")->status, 400);
  EXPECT_EQ(client().Post("/send", json{{"peer", "bob"}}.dump(), "application/json")->status, 400);
  auto u = send("carol", "hi");
  EXPECT_EQ(u->status, 404);
  EXPECT_EQ(json::parse(u->body)["error"], "UNKNOWN_PEER");
}

TEST_F(ConsoleApiTest, MismatchThenRepin) {
  ASSERT_EQ(send("bob", "first")->status, 200);
  auto mallory = kem::kem_generate_keypair(system_entropy()).public_key;
  proxy->set_transform([&](LineProxy::Direction d, const std::string& line) -> std::optional<std::string> {
    auto f = wire::decode_frame(line);
    if (d == LineProxy::Direction::kToClient && f && f->type == wire::FrameType::kKey) {
      return wire::encode_frame(wire::make_key(f->peer, base64_encode(mallory.view())));
    }
    return line;
  });

  auto r = send("bob", "second");
  ASSERT_EQ(r->status, 409);
  auto j = json::parse(r->body);
  EXPECT_EQ(j["error"], "FINGERPRINT_MISMATCH");
  EXPECT_EQ(j["pinned"], bob->identity().fingerprint);
  EXPECT_EQ(j["offered"], fingerprint(mallory.view()));

  auto peers = json::parse(client().Get("/peers")->body);
  EXPECT_EQ(peers[0]["pending_fingerprint"], fingerprint(mallory.view()));

  EXPECT_EQ(client().Post("/peers/carol/repin")->status, 409);
  auto rp = client().Post("/peers/bob/repin");
  ASSERT_EQ(rp->status, 200);
  EXPECT_EQ(json::parse(rp->body)["repinned"], true);
  EXPECT_EQ(send("bob", "third")->status, 200);
}

TEST_F(ConsoleApiTest, EventStreamReplaysHistoryThenLive) {
  ASSERT_EQ(send("bob", "before")->status, 200);
  bob->send_message("alice", "reply");
  ASSERT_TRUE(eventually([&] { return alice->history().size() == 2; }));

  std::mutex m;
  std::string body;
  std::atomic<bool> done{false};
  std::thread reader([&] {
    auto c = client();
    c.Get("/events", [&](const char* data, std::size_t n) {
      std::lock_guard<std::mutex> lock(m);
      body.append(data, n);
      bool enough = body.find("\"live\"") != std::string::npos && body.find(": keepalive") != std::string::npos;
      if (enough) done = true;
      return !enough;
    });
  });
  ASSERT_TRUE(eventually([&] {
    std::lock_guard<std::mutex> lock(m);
    return body.find("reply") != std::string::npos;
  }));
  bob->send_message("alice", "live");
  EXPECT_TRUE(eventually([&] { return done.load(); }, std::chrono::milliseconds(5000)));
  reader.join();

  std::vector<json> events;
  std::size_t pos = 0;
  while ((pos = body.find("data: ", pos)) != std::string::npos) {
    auto end = body.find("\n\n", pos);
    events.push_back(json::parse(body.substr(pos + 6, end - pos - 6)));
    pos = end;
  }
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(events[0]["direction"], "out");
  EXPECT_EQ(events[0]["text"], "before");
  EXPECT_EQ(events[1]["direction"], "in");
  EXPECT_EQ(events[1]["peer"], "bob");
  EXPECT_EQ(events[1]["text"], "reply");
  EXPECT_EQ(events[2]["text"], "live");
}

TEST_F(ConsoleApiTest, BindsLoopbackOnly) {
  httplib::Client c("127.0.0.1", api->port());
  EXPECT_TRUE(c.Get("/identity"));
  // Refuses a second server on the same port.
  ConsoleOptions o;
  o.port = api->port();
  ConsoleApi clash(*alice, o);
  EXPECT_THROW(clash.start(), std::runtime_error);
}

}  // namespace
}  // namespace pqe::client
