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

#include "line_proxy.hpp"

#include <boost/asio.hpp>
#include <future>
#include <list>
#include <mutex>
#include <thread>

namespace pqe::testing {
namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

struct Pair : std::enable_shared_from_this<Pair> {
  explicit Pair(asio::io_context& io) : client(io), upstream(io) {}
  tcp::socket client;
  tcp::socket upstream;
  asio::streambuf from_client{std::size_t{8} << 20};
  asio::streambuf from_upstream{std::size_t{8} << 20};
  bool closed = false;

  void close() {
    if (closed) return;
    closed = true;
    boost::system::error_code ec;
    client.shutdown(tcp::socket::shutdown_both, ec);
    upstream.shutdown(tcp::socket::shutdown_both, ec);
    client.close(ec);
    upstream.close(ec);
  }
};

}  // namespace

class LineProxy::Impl {
 public:
  Impl(std::uint16_t upstream_port, Transform transform)
      : upstream_port_(upstream_port),
        transform_(std::move(transform)),
        acceptor_(io_, tcp::endpoint(asio::ip::make_address("127.0.0.1"), 0)) {
    accept();
    thread_ = std::thread([this] { io_.run(); });
  }

  ~Impl() {
    std::promise<void> done;
    asio::post(io_, [&] {
      boost::system::error_code ec;
      acceptor_.close(ec);
      for (auto& p : pairs_) p->close();
      done.set_value();
    });
    done.get_future().wait();
    io_.stop();
    thread_.join();
  }

  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  void set_transform(Transform t) {
    std::lock_guard<std::mutex> lock(mutex_);
    transform_ = std::move(t);
  }

  std::vector<std::pair<Direction, std::string>> captured() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return captured_;
  }

  void drop_connections() {
    std::promise<void> done;
    asio::post(io_, [&] {
      for (auto& p : pairs_) p->close();
      pairs_.clear();
      done.set_value();
    });
    done.get_future().wait();
  }

 private:
  void accept() {
    auto pair = std::make_shared<Pair>(io_);
    acceptor_.async_accept(pair->client, [this, pair](boost::system::error_code ec) {
      if (ec) return;
      boost::system::error_code cec;
      pair->upstream.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), upstream_port_), cec);
      if (cec) {
        pair->close();
      } else {
        pair->client.set_option(tcp::no_delay(true), cec);
        pair->upstream.set_option(tcp::no_delay(true), cec);
        pairs_.push_back(pair);
        pump(pair, Direction::kToRelay);
        pump(pair, Direction::kToClient);
      }
      accept();
    });
  }

  void pump(const std::shared_ptr<Pair>& pair, Direction dir) {
    auto& src = dir == Direction::kToRelay ? pair->client : pair->upstream;
    auto& buf = dir == Direction::kToRelay ? pair->from_client : pair->from_upstream;
    asio::async_read_until(src, buf, '\n', [this, pair, dir, &buf](boost::system::error_code ec, std::size_t n) {
      if (ec || pair->closed) return pair->close();
      std::string line(asio::buffers_begin(buf.data()), asio::buffers_begin(buf.data()) + n - 1);
      buf.consume(n);
      std::optional<std::string> out = line;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        if (transform_) out = transform_(dir, line);
        if (out) captured_.emplace_back(dir, *out);
      }
      if (!out) return pump(pair, dir);
      auto data = std::make_shared<std::string>(*out + "\n");
      auto& dst = dir == Direction::kToRelay ? pair->upstream : pair->client;
      asio::async_write(dst, asio::buffer(*data), [this, pair, dir, data](boost::system::error_code wec, std::size_t) {
        if (wec) return pair->close();
        pump(pair, dir);
      });
    });
  }

  asio::io_context io_;
  std::uint16_t upstream_port_;
  mutable std::mutex mutex_;
  Transform transform_;
  std::vector<std::pair<Direction, std::string>> captured_;
  tcp::acceptor acceptor_;
  std::list<std::shared_ptr<Pair>> pairs_;
  std::thread thread_;
};

LineProxy::LineProxy(std::uint16_t upstream_port, Transform transform)
    : impl_(std::make_unique<Impl>(upstream_port, std::move(transform))) {}
LineProxy::~LineProxy() = default;
std::uint16_t LineProxy::port() const { return impl_->port(); }
void LineProxy::set_transform(Transform transform) { impl_->set_transform(std::move(transform)); }
std::vector<std::pair<LineProxy::Direction, std::string>> LineProxy::captured() const { return impl_->captured(); }
void LineProxy::drop_connections() { impl_->drop_connections(); }

}  // namespace pqe::testing
