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

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <mutex>
#include <sstream>

#include "line_client.hpp"
#include "pqe/common/bytes.hpp"
#include "pqe/relay/relay_server.hpp"
#include "test_support.hpp"

namespace pqe::relay {
namespace {

using pqe::testing::LineClient;
using wire::FrameType;

const std::string kKey = base64_encode(Bytes(wire::kPublicKeySize, 3));

class SyncStream : public std::stringbuf {
 public:
  std::string text() {
    std::lock_guard<std::recursive_mutex> lock(m_);
    return str();
  }

 protected:
  int sync() override { return 0; }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    std::lock_guard<std::recursive_mutex> lock(m_);
    return std::stringbuf::xsputn(s, n);
  }
  int_type overflow(int_type c) override {
    std::lock_guard<std::recursive_mutex> lock(m_);
    return std::stringbuf::overflow(c);
  }

 private:
  std::recursive_mutex m_;
};

struct RelayServerTest : ::testing::Test {
  SyncStream logbuf;
  std::ostream log{&logbuf};
  std::mutex tap_mutex;
  std::vector<std::string> tapped;
  std::unique_ptr<RelayServer> relay;

  void SetUp() override {
    RelayOptions o;
    o.port = 0;
    o.log = &log;
    o.wire_tap = [this](WireDirection, ConnectionId, std::string_view line) {
      std::lock_guard<std::mutex> lock(tap_mutex);
      tapped.emplace_back(line);
    };
    relay = std::make_unique<RelayServer>(o);
    relay->start();
  }
  void TearDown() override { relay->stop(); }

  wire::Frame expect_frame(LineClient& c) {
    auto line = c.read_line();
    EXPECT_TRUE(line.has_value());
    if (!line) return {};
    auto f = wire::decode_frame(*line);
    EXPECT_TRUE(f) << *line;
    return f ? *f : wire::Frame{};
  }

  void register_as(LineClient& c, const std::string& name) {
    c.send_line(wire::encode_frame(wire::make_register(name)));
    auto f = expect_frame(c);
    ASSERT_EQ(f.type, FrameType::kRegisterOk) << name;
  }

  bool logged(const std::string& s) {
    return pqe::testing::eventually([&] { return logbuf.text().find(s + "\n") != std::string::npos; });
  }
};

TEST_F(RelayServerTest, LogsListeningAddress) {
  EXPECT_TRUE(logged("Server running on 127.0.0.1:" + std::to_string(relay->port())));
}

TEST_F(RelayServerTest, PlainTcpExchange) {
  LineClient bob(relay->port()), alice(relay->port());
  register_as(bob, "bob");
  bob.send_line(wire::encode_frame(wire::make_publish_key(kKey)));
  register_as(alice, "alice");
  alice.send_line(wire::encode_frame(wire::make_fetch_key("bob")));
  auto key = expect_frame(alice);
  EXPECT_EQ(key.type, FrameType::kKey);
  EXPECT_EQ(key.payload, kKey);

  alice.send_line(wire::encode_frame(wire::make_send("bob", "SGVsbG8=")));
  auto d = expect_frame(bob);
  EXPECT_EQ(d.type, FrameType::kDeliver);
  EXPECT_EQ(d.peer, "alice");
  EXPECT_EQ(d.payload, "SGVsbG8=");
  EXPECT_TRUE(logged("Registered bob"));
  EXPECT_TRUE(logged("Registered alice"));
  EXPECT_TRUE(logged("Relayed message from alice to bob"));
  EXPECT_EQ(relay->counters().relayed, 1u);
}

TEST_F(RelayServerTest, MalformedLineGetsErrorAndConnectionSurvives) {
  LineClient c(relay->port());
  c.send_line("this is not json");
  auto e = expect_frame(c);
  EXPECT_EQ(e.type, FrameType::kError);
  EXPECT_EQ(e.code, wire::ErrorCode::kMalformed);
  register_as(c, "carol");
}

TEST_F(RelayServerTest, OversizedLineRejectedAndClosed) {
  LineClient c(relay->port());
  std::string huge(wire::kMaxLineSize + 10, 'A');
  c.send_raw(huge);
  auto e = expect_frame(c);
  EXPECT_EQ(e.code, wire::ErrorCode::kMalformed);
  EXPECT_TRUE(c.closed_by_peer());
}

TEST_F(RelayServerTest, DisconnectReleasesNameAndQueues) {
  {
    LineClient bob(relay->port());
    register_as(bob, "bob");
  }
  ASSERT_TRUE(logged("Disconnected bob"));
  LineClient alice(relay->port());
  register_as(alice, "alice");
  alice.send_line(wire::encode_frame(wire::make_send("bob", "QUFB")));
  ASSERT_TRUE(pqe::testing::eventually([&] { return relay->counters().queued == 1; }));

  LineClient bob2(relay->port());
  register_as(bob2, "bob");
  auto d = expect_frame(bob2);
  EXPECT_EQ(d.type, FrameType::kDeliver);
  EXPECT_EQ(d.payload, "QUFB");
}

TEST_F(RelayServerTest, NameTakenWhileOnline) {
  LineClient a(relay->port()), b(relay->port());
  register_as(a, "dup");
  b.send_line(wire::encode_frame(wire::make_register("dup")));
  auto e = expect_frame(b);
  EXPECT_EQ(e.code, wire::ErrorCode::kNameTaken);
}

TEST_F(RelayServerTest, WebSocketClientInteroperatesWithTcpClient) {
  namespace beast = boost::beast;
  namespace ws = beast::websocket;
  boost::asio::io_context io;
  ws::stream<boost::asio::ip::tcp::socket> socket(io);
  socket.next_layer().connect({boost::asio::ip::make_address("127.0.0.1"), relay->port()});
  socket.handshake("127.0.0.1", "/");
  socket.text(true);

  auto ws_send = [&](const wire::Frame& f) { socket.write(boost::asio::buffer(wire::encode_frame(f))); };
  auto ws_recv = [&] {
    beast::flat_buffer buf;
    socket.read(buf);
    auto f = wire::decode_frame(beast::buffers_to_string(buf.data()));
    EXPECT_TRUE(f);
    return f ? *f : wire::Frame{};
  };

  ws_send(wire::make_register("wsuser"));
  EXPECT_EQ(ws_recv().type, FrameType::kRegisterOk);

  LineClient tcp(relay->port());
  register_as(tcp, "tcpuser");
  tcp.send_line(wire::encode_frame(wire::make_send("wsuser", "QkJC")));
  auto d = ws_recv();
  EXPECT_EQ(d.type, FrameType::kDeliver);
  EXPECT_EQ(d.peer, "tcpuser");

  ws_send(wire::make_send("tcpuser", "Q0ND"));
  auto back = expect_frame(tcp);
  EXPECT_EQ(back.peer, "wsuser");
  EXPECT_EQ(back.payload, "Q0ND");
  socket.close(ws::close_code::normal);
}

TEST_F(RelayServerTest, WireTapSeesBothDirections) {
  LineClient c(relay->port());
  register_as(c, "tapped");
  ASSERT_TRUE(pqe::testing::eventually([&] {
    std::lock_guard<std::mutex> lock(tap_mutex);
    return tapped.size() >= 2;
  }));
  std::lock_guard<std::mutex> lock(tap_mutex);
  EXPECT_NE(tapped[0].find("REGISTER"), std::string::npos);
  EXPECT_NE(tapped[1].find("REGISTER_OK"), std::string::npos);
}

TEST(RelayServerLifecycle, StopIsIdempotentAndPortIsReported) {
  RelayOptions o;
  o.port = 0;
  RelayServer relay(o);
  relay.start();
  EXPECT_NE(relay.port(), 0);
  relay.stop();
  relay.stop();
}

}  // namespace
}  // namespace pqe::relay
