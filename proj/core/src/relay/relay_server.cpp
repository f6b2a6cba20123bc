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

#include "pqe/relay/relay_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <deque>
#include <future>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace pqe::relay {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kReadChunk = 64 * 1024;

class Session : public std::enable_shared_from_this<Session> {
 public:
  using LineHandler = std::function<void(ConnectionId, std::string_view)>;
  using CloseHandler = std::function<void(ConnectionId)>;

  Session(ConnectionId id, LineHandler on_line, CloseHandler on_close)
      : id_(id), on_line_(std::move(on_line)), on_close_(std::move(on_close)) {}
  virtual ~Session() = default;

  ConnectionId id() const { return id_; }
  virtual void start(std::string initial) = 0;
  virtual void send(std::string line) = 0;
  virtual void close() = 0;

 protected:
  void closed() {
    if (!closed_) {
      closed_ = true;
      on_close_(id_);
    }
  }

  ConnectionId id_;
  LineHandler on_line_;
  CloseHandler on_close_;
  bool closed_ = false;
};

class PlainSession final : public Session {
 public:
  PlainSession(ConnectionId id, tcp::socket socket, LineHandler on_line, CloseHandler on_close)
      : Session(id, std::move(on_line), std::move(on_close)), socket_(std::move(socket)) {}

  void start(std::string initial) override {
    pending_ = std::move(initial);
    if (!drain()) return;
    read();
  }

  void send(std::string line) override {
    if (closed_) return;
    line.push_back('\n');
    outbox_.push_back(std::move(line));
    if (outbox_.size() == 1) write();
  }

  void close() override {
    beast::error_code ec;
    socket_.shutdown(tcp::socket::shutdown_both, ec);
    socket_.close(ec);
    closed();
  }

 private:
  // Dispatches complete lines; false once the connection must be dropped.
  bool drain() {
    std::size_t start = 0;
    for (;;) {
      auto nl = pending_.find('\n', start);
      if (nl == std::string::npos) break;
      std::string_view line(pending_.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) on_line_(id_, line);
      start = nl + 1;
      if (closed_) return false;
    }
    pending_.erase(0, start);
    if (pending_.size() > wire::kMaxLineSize) {
      on_line_(id_, {});  // surfaces MALFORMED for an oversized line
      close();
      return false;
    }
    return true;
  }

  void read() {
    buffer_.resize(kReadChunk);
    socket_.async_read_some(asio::buffer(buffer_), [self = shared_from_this(), this](beast::error_code ec, std::size_t n) {
      if (ec) {
        close();
        return;
      }
      pending_.append(buffer_.data(), n);
      if (drain()) read();
    });
  }

  void write() {
    asio::async_write(socket_, asio::buffer(outbox_.front()),
                      [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
                        if (ec) {
                          close();
                          return;
                        }
                        outbox_.pop_front();
                        if (!outbox_.empty()) write();
                      });
  }

  tcp::socket socket_;
  std::string buffer_;
  std::string pending_;
  std::deque<std::string> outbox_;
};

class WebSocketSession final : public Session {
 public:
  WebSocketSession(ConnectionId id, tcp::socket socket, LineHandler on_line, CloseHandler on_close)
      : Session(id, std::move(on_line), std::move(on_close)), ws_(std::move(socket)) {}

  void start(std::string initial) override {
    auto n = asio::buffer_copy(buffer_.prepare(initial.size()), asio::buffer(initial));
    buffer_.commit(n);
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
                       if (ec || !websocket::is_upgrade(request_)) {
                         close();
                         return;
                       }
                       ws_.read_message_max(wire::kMaxLineSize + 1);
                       ws_.async_accept(request_, [self, this](beast::error_code ec2) {
                         if (ec2) {
                           close();
                           return;
                         }
                         buffer_.consume(buffer_.size());
                         read();
                       });
                     });
  }

  void send(std::string line) override {
    if (closed_) return;
    outbox_.push_back(std::move(line));
    if (outbox_.size() == 1) write();
  }

  void close() override {
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
    closed();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
      if (ec) {
        if (ec == websocket::error::message_too_big) on_line_(id_, {});
        close();
        return;
      }
      std::string message = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      std::string_view rest(message);
      while (!rest.empty() && !closed_) {
        auto nl = rest.find('\n');
        auto line = rest.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) on_line_(id_, line);
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
      }
      if (!closed_) read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
      if (ec) {
        close();
        return;
      }
      outbox_.pop_front();
      if (!outbox_.empty()) write();
    });
  }

  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::deque<std::string> outbox_;
};

}  // namespace

class RelayServer::Impl {
 public:
  explicit Impl(RelayOptions options)
      : options_(std::move(options)),
        acceptor_(io_),
        directory_([this](std::string_view line) { log(line); }, options_.queue_capacity) {}

  void listen() {
    if (listening_) return;
    tcp::endpoint endpoint(asio::ip::make_address(options_.host), options_.port);
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    listening_ = true;
    log("Server running on " + options_.host + ":" + std::to_string(port_));
    accept();
  }

  void start() {
    listen();
    thread_ = std::thread([this] { io_.run(); });
  }

  void run() {
    listen();
    io_.run();
  }

  void stop() {
    asio::post(io_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      auto sessions = sessions_;
      for (auto& [id, s] : sessions) s->close();
      io_.stop();
    });
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
  }

  std::uint16_t port() const { return port_; }

  RelayCounters counters() {
    if (io_.stopped() || !listening_) return directory_.counters();
    std::promise<RelayCounters> p;
    auto f = p.get_future();
    asio::post(io_, [&] { p.set_value(directory_.counters()); });
    return f.get();
  }

 private:
  void log(std::string_view line) {
    if (!options_.log) return;
    std::lock_guard lock(log_mutex_);
    *options_.log << line << std::endl;
  }

  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      beast::error_code ignored;
      socket.set_option(tcp::no_delay(true), ignored);
      sniff(std::move(socket));
      accept();
    });
  }

  // The first bytes decide the transport: "GET " means a WebSocket upgrade.
  void sniff(tcp::socket socket) {
    auto sock = std::make_shared<tcp::socket>(std::move(socket));
    auto buf = std::make_shared<std::string>(kReadChunk, '\0');
    sock->async_read_some(asio::buffer(*buf), [this, sock, buf](beast::error_code ec, std::size_t n) {
      if (ec) return;
      buf->resize(n);
      ConnectionId id = next_id_++;
      auto on_line = [this](ConnectionId from, std::string_view line) { on_line_received(from, line); };
      auto on_close = [this](ConnectionId cid) { on_closed(cid); };
      std::shared_ptr<Session> session;
      if (buf->rfind("GET ", 0) == 0) {
        session = std::make_shared<WebSocketSession>(id, std::move(*sock), on_line, on_close);
      } else {
        session = std::make_shared<PlainSession>(id, std::move(*sock), on_line, on_close);
      }
      sessions_[id] = session;
      session->start(std::move(*buf));
    });
  }

  void on_line_received(ConnectionId from, std::string_view line) {
    if (options_.wire_tap) options_.wire_tap(WireDirection::kInbound, from, line);
    std::vector<Outbound> out;
    if (line.empty()) {
      out = directory_.reject(from, "frame exceeds size limit");
    } else if (auto frame = wire::decode_frame(line)) {
      out = directory_.handle(from, *frame);
    } else {
      out = directory_.reject(from, frame.error());
    }
    for (auto& o : out) {
      auto it = sessions_.find(o.to);
      if (it == sessions_.end()) continue;
      std::string encoded = wire::encode_frame(o.frame);
      if (options_.wire_tap) options_.wire_tap(WireDirection::kOutbound, o.to, encoded);
      it->second->send(std::move(encoded));
    }
  }

  void on_closed(ConnectionId id) {
    directory_.disconnect(id);
    // Deferred so the session is not destroyed inside its own handler.
    asio::post(io_, [this, id] { sessions_.erase(id); });
  }

  RelayOptions options_;
  asio::io_context io_;
  tcp::acceptor acceptor_;
  Directory directory_;
  std::unordered_map<ConnectionId, std::shared_ptr<Session>> sessions_;
  ConnectionId next_id_ = 1;
  std::atomic<std::uint16_t> port_{0};
  std::atomic<bool> listening_{false};
  std::thread thread_;
  std::mutex log_mutex_;
};

RelayServer::RelayServer(RelayOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

RelayServer::~RelayServer() { stop(); }

void RelayServer::listen() { impl_->listen(); }
void RelayServer::start() { impl_->start(); }
void RelayServer::run() { impl_->run(); }
void RelayServer::stop() { impl_->stop(); }
std::uint16_t RelayServer::port() const { return impl_->port(); }
RelayCounters RelayServer::counters() const { return impl_->counters(); }

}  // namespace pqe::relay
