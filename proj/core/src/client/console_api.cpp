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

#include <httplib.h>

#include <array>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include "json.hpp"
#include <thread>

namespace pqe::client {
using nlohmann::json;

namespace {

json event_json(const ChatEvent& e) {
  json j{{"direction", to_string(e.direction)}, {"peer", e.peer}, {"seq", e.seq}, {"timestamp", e.timestamp_ms}};
  if (e.text) j["text"] = *e.text;
  if (e.failure) j["failure"] = *e.failure;
  return j;
}

json peer_json(const PeerRecord& p) {
  json j{{"name", p.name},
         {"fingerprint", p.fingerprint},
         {"fingerprint_display", fingerprint_display(p.fingerprint)},
         {"first_seen_ms", p.first_seen_ms},
         {"pinned", true}};
  if (p.pending) j["pending_fingerprint"] = p.pending->fingerprint;
  return j;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view code, std::string_view detail) {
  reply(res, status, json{{"error", code}, {"detail", detail}});
}

// One SSE connection: events queue up here until the provider drains them.
struct EventStream {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> pending;
  bool closed = false;

  void push(std::string line) {
    {
      std::lock_guard<std::mutex> lock(mutex);
      pending.push_back(std::move(line));
    }
    cv.notify_one();
  }
  void close() {
    {
      std::lock_guard<std::mutex> lock(mutex);
      closed = true;
    }
    cv.notify_all();
  }
};

std::string sse_data(const ChatEvent& e) {
  return "data: " + event_json(e).dump(-1, ' ', false, json::error_handler_t::replace) + "\n\n";
}

}  // namespace

class ConsoleApi::Impl {
 public:
  Impl(ClientAgent& agent, ConsoleOptions options) : agent_(agent), opts_(std::move(options)) {
    if (opts_.token.empty()) {
      std::array<std::uint8_t, 16> raw{};
      system_entropy().fill(raw);
      opts_.token = to_hex(raw);
    }
    routes();
  }

  ~Impl() { stop(); }

  void start() {
    // SO_REUSEADDR only: the library default (SO_REUSEPORT) lets another
    // process bind the same port and receive some of the connections.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    int port = opts_.port == 0 ? server_.bind_to_any_port("127.0.0.1") : opts_.port;
    if (port <= 0 || (opts_.port != 0 && !server_.bind_to_port("127.0.0.1", opts_.port))) {
      throw std::runtime_error("console API cannot bind 127.0.0.1:" + std::to_string(opts_.port));
    }
    port_ = static_cast<std::uint16_t>(port);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (stopped_.exchange(true)) return;
    {
      std::lock_guard<std::mutex> lock(streams_mutex_);
      for (auto& s : streams_) s->close();
    }
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::uint16_t port() const { return port_; }
  const std::string& token() const { return opts_.token; }

 private:
  bool authorized(const httplib::Request& req) const {
    std::string presented;
    auto auth = req.get_header_value("Authorization");
    constexpr std::string_view kBearer = "Bearer ";
    if (auth.compare(0, kBearer.size(), kBearer) == 0) presented = auth.substr(kBearer.size());
    else if (req.has_param("token")) presented = req.get_param_value("token");
    return !presented.empty() && constant_time_equal(as_bytes(presented), as_bytes(opts_.token));
  }

  void routes() {
    server_.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (authorized(req)) return httplib::Server::HandlerResponse::Unhandled;
      res.set_header("WWW-Authenticate", "Bearer");
      reply_error(res, 401, "UNAUTHORIZED", "missing or invalid bearer token");
      return httplib::Server::HandlerResponse::Handled;
    });

    server_.Get("/identity", [this](const httplib::Request&, httplib::Response& res) {
      const auto& id = agent_.identity();
      reply(res, 200,
            json{{"name", id.name}, {"fingerprint", id.fingerprint},
                 {"fingerprint_display", fingerprint_display(id.fingerprint)}});
    });

    server_.Get("/peers", [this](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (const auto& p : agent_.peers()) arr.push_back(peer_json(p));
      reply(res, 200, arr);
    });

    server_.Post("/send", [this](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body, nullptr, false);
      if (!body.is_object() || !body.contains("peer") || !body.contains("text") || !body["peer"].is_string() ||
          !body["text"].is_string()) {
        return reply_error(res, 400, "BAD_REQUEST", "expected {\"peer\": string, \"text\": string}");
      }
      try {
        auto seq = agent_.send_message(body["peer"].get<std::string>(), body["text"].get<std::string>());
        reply(res, 200, json{{"seq", seq}});
      } catch (const SendError& e) {
        switch (e.kind()) {
          case SendError::Kind::kInvalid:
            return reply_error(res, 400, "BAD_REQUEST", e.what());
          case SendError::Kind::kUnknownPeer:
            return reply_error(res, 404, "UNKNOWN_PEER", e.what());
          case SendError::Kind::kFingerprintMismatch:
            return reply(res, 409,
                         json{{"error", "FINGERPRINT_MISMATCH"},
                              {"detail", e.what()},
                              {"pinned", e.pinned_fingerprint()},
                              {"offered", e.offered_fingerprint()}});
          case SendError::Kind::kNotConnected:
            return reply_error(res, 503, "NOT_CONNECTED", e.what());
          case SendError::Kind::kTimeout:
            return reply_error(res, 504, "TIMEOUT", e.what());
        }
      } catch (const AgentError& e) {
        reply_error(res, 503, "NOT_CONNECTED", e.what());
      }
    });

    server_.Post(R"(/peers/([a-z0-9_-]{1,64})/repin)", [this](const httplib::Request& req, httplib::Response& res) {
      std::string name = req.matches[1];
      if (agent_.repin(name)) return reply(res, 200, json{{"repinned", true}, {"peer", name}});
      reply_error(res, 409, "NO_PENDING_KEY", "no changed key is pending for " + name);
    });

    server_.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
      auto stream = std::make_shared<EventStream>();
      std::uint64_t sub = 0;
      auto history = agent_.subscribe_with_history([stream](const ChatEvent& e) { stream->push(sse_data(e)); }, sub);
      for (const auto& e : history) stream->push(sse_data(e));
      {
        std::lock_guard<std::mutex> lock(streams_mutex_);
        if (stopped_) stream->close();
        streams_.push_back(stream);
      }
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, stream](std::size_t, httplib::DataSink& sink) {
            std::unique_lock<std::mutex> lock(stream->mutex);
            stream->cv.wait_for(lock, opts_.keepalive, [&] { return stream->closed || !stream->pending.empty(); });
            if (stream->closed) return false;
            if (stream->pending.empty()) return sink.write(": keepalive\n\n", 13);
            while (!stream->pending.empty()) {
              std::string line = std::move(stream->pending.front());
              stream->pending.pop_front();
              if (!sink.write(line.data(), line.size())) return false;
            }
            return true;
          },
          [this, stream, sub](bool) {
            stream->close();
            try {
              agent_.unsubscribe(sub);
            } catch (const AgentError&) {
            }
            std::lock_guard<std::mutex> lock(streams_mutex_);
            std::erase(streams_, stream);
          });
    });
  }

  ClientAgent& agent_;
  ConsoleOptions opts_;
  httplib::Server server_;
  std::thread thread_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopped_{false};
  std::mutex streams_mutex_;
  std::vector<std::shared_ptr<EventStream>> streams_;
};

ConsoleApi::ConsoleApi(ClientAgent& agent, ConsoleOptions options)
    : impl_(std::make_unique<Impl>(agent, std::move(options))) {}
ConsoleApi::~ConsoleApi() = default;
void ConsoleApi::start() { impl_->start(); }
void ConsoleApi::stop() { impl_->stop(); }
std::uint16_t ConsoleApi::port() const { return impl_->port(); }
const std::string& ConsoleApi::token() const { return impl_->token(); }

}  // namespace pqe::client
