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

#include "pqe/client/agent.hpp"

#include <atomic>
#include <boost/asio.hpp>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <thread>

#include "pqe/client/seq_store.hpp"
#include "pqe/envelope/session.hpp"
#include "pqe/wire/frame.hpp"

namespace pqe::client {
namespace asio = boost::asio;
using asio::ip::tcp;
namespace fs = std::filesystem;

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string pin_name_for(const fs::path& path) {
  std::string stem = path.filename().string();
  for (std::string_view suffix : {"_pub.pem", ".pem"}) {
    if (stem.size() > suffix.size() && stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return stem.substr(0, stem.size() - suffix.size());
    }
  }
  return stem;
}

std::string failure_class(envelope::OpenFailure f) { return std::string(envelope::to_string(f)); }

struct FetchResult {
  std::optional<Bytes> key;
  SendError::Kind error = SendError::Kind::kUnknownPeer;
};

}  // namespace

std::string_view to_string(EventDirection direction) {
  return direction == EventDirection::kInbound ? "in" : "out";
}

std::string format_event(const ChatEvent& event) {
  if (event.failure) {
    return "! rejected message from " + event.peer + ": " + *event.failure + " failure";
  }
  if (event.direction == EventDirection::kInbound) return "[" + event.peer + "] " + event.text.value_or("");
  return "> " + event.text.value_or("");
}

class ClientAgent::Impl {
 public:
  explicit Impl(AgentConfig config)
      : cfg_(std::move(config)),
        rng_(cfg_.rng ? *cfg_.rng : system_entropy()),
        id_(init_identity(cfg_.name, cfg_.key_dir, rng_)),
        peers_(state_path("_peers.txt")),
        seqs_(state_path("_seq.txt"), rng_),
        replay_(state_path("_replay.txt")),
        sealer_(cfg_.rekey_every),
        opener_(id_.keys.secret_key, cfg_.opener_cache),
        socket_(io_),
        resolver_(io_),
        retry_timer_(io_),
        readbuf_(wire::kMaxLineSize + 1),
        backoff_(cfg_.backoff_initial) {
    if (!wire::is_valid_name(cfg_.name)) throw AgentError("invalid client name '" + cfg_.name + "'");
    if (cfg_.envelope_version != envelope::kVersionV1 && cfg_.envelope_version != envelope::kVersionV2) {
      throw AgentError("unsupported envelope version " + std::to_string(cfg_.envelope_version));
    }
    for (const auto& problem : peers_.load()) log("warning: " + problem);
    if (!seqs_.load()) log("warning: sequence file corrupt; continuing from a randomized offset");
    replay_.load();
    for (const auto& path : cfg_.pin_files) {
      auto pk = load_public_key(path);
      std::string peer = pin_name_for(path);
      peers_.pin(peer, pk, now_ms());
      log("Pinned " + peer + " from " + path.string() + " fingerprint " + fingerprint_display(fingerprint(pk.view())));
    }
  }

  ~Impl() { stop(); }

  const Identity& identity() const { return id_; }

  void start() {
    if (started_.exchange(true)) throw AgentError("agent already started");
    auto registered = start_promise_.get_future();
    work_.emplace(asio::make_work_guard(io_));
    asio::post(io_, [this] { connect(); });
    loop_running_ = true;
    thread_ = std::thread([this] { io_.run(); });

    if (registered.wait_for(cfg_.request_timeout) != std::future_status::ready) {
      stop();
      throw AgentError("could not register as '" + cfg_.name + "' with relay " + relay_addr() + " within " +
                       std::to_string(cfg_.request_timeout.count()) + " ms");
    }
    try {
      registered.get();
    } catch (...) {
      stop();
      throw;
    }
  }

  void stop() {
    if (!loop_running_.exchange(false)) return;
    asio::post(io_, [this] {
      stopping_ = true;
      retry_timer_.cancel();
      resolver_.cancel();
      boost::system::error_code ec;
      socket_.close(ec);
      io_.stop();
    });
    if (thread_.joinable()) thread_.join();
    work_.reset();
  }

  PeerRecord resolve_peer(const std::string& peer) {
    if (!wire::is_valid_name(peer)) throw SendError(SendError::Kind::kInvalid, "invalid peer name '" + peer + "'");
    auto fetched = call([&] { return request_key(peer); });
    if (fetched.wait_for(cfg_.request_timeout) != std::future_status::ready) {
      throw SendError(SendError::Kind::kTimeout, "timed out fetching key for " + peer);
    }
    FetchResult result = fetched.get();
    return call([&] { return pin_fetched(peer, result); });
  }

  std::uint64_t send_message(const std::string& peer, const std::string& text) {
    if (text.empty()) throw SendError(SendError::Kind::kInvalid, "empty message");
    if (text.size() > envelope::kMaxPlaintextSize) {
      throw SendError(SendError::Kind::kInvalid, "message exceeds " + std::to_string(envelope::kMaxPlaintextSize) +
                                                     " bytes");
    }
    if (!wire::is_valid_name(peer)) throw SendError(SendError::Kind::kInvalid, "invalid peer name '" + peer + "'");
    auto fetched = call([&] { return request_key(peer); });
    if (fetched.wait_for(cfg_.request_timeout) != std::future_status::ready) {
      throw SendError(SendError::Kind::kTimeout, "timed out fetching key for " + peer);
    }
    FetchResult result = fetched.get();
    return call([&] {
      PeerRecord rec = pin_fetched(peer, result);
      if (!registered_) throw SendError(SendError::Kind::kNotConnected, "not connected to relay");
      envelope::EnvelopeHeader header{cfg_.envelope_version, cfg_.name, peer, seqs_.next(peer)};
      auto env = sealer_.seal(rec.public_key, header, as_bytes(text), rng_);
      write_frame(wire::make_send(peer, base64_encode(envelope::encode_envelope(env))));
      emit(ChatEvent{EventDirection::kOutbound, peer, text, std::nullopt, header.seq, now_ms()});
      return header.seq;
    });
  }

  std::vector<PeerRecord> peers() {
    return call([&] { return peers_.list(); });
  }

  bool repin(const std::string& peer) {
    return call([&] {
      const PeerRecord* rec = peers_.find(peer);
      if (!rec || !rec->pending) return false;
      std::string old_fp = rec->fingerprint;
      peers_.repin(peer, now_ms());
      log("Re-pinned " + peer + ": " + fingerprint_display(old_fp) + " -> " +
          fingerprint_display(peers_.find(peer)->fingerprint));
      return true;
    });
  }

  std::uint64_t subscribe(Subscriber s) {
    return call([&] {
      subscribers_.emplace(++next_subscriber_, std::move(s));
      return next_subscriber_;
    });
  }

  std::vector<ChatEvent> subscribe_with_history(Subscriber s, std::uint64_t& id) {
    return call([&] {
      subscribers_.emplace(++next_subscriber_, std::move(s));
      id = next_subscriber_;
      return std::vector<ChatEvent>(history_.begin(), history_.end());
    });
  }

  void unsubscribe(std::uint64_t id) {
    call([&] {
      subscribers_.erase(id);
      return 0;
    });
  }

  std::vector<ChatEvent> history() {
    return call([&] { return std::vector<ChatEvent>(history_.begin(), history_.end()); });
  }

  AgentStatus status() {
    return call([&] { return AgentStatus{connected_, registered_, reconnects_}; });
  }

 private:
  // Runs `fn` on the event loop and waits for it. Before start() and after
  // stop() there is no loop, so `fn` runs inline.
  template <class F>
  auto call(F&& fn) -> decltype(fn()) {
    using R = decltype(fn());
    if (!loop_running_ || std::this_thread::get_id() == thread_.get_id()) return fn();
    std::packaged_task<R()> task(std::forward<F>(fn));
    auto fut = task.get_future();
    asio::post(io_, [&task] { task(); });
    while (fut.wait_for(std::chrono::milliseconds(50)) != std::future_status::ready) {
      if (!loop_running_) {
        if (thread_.joinable()) thread_.join();
        if (fut.wait_for(std::chrono::seconds(0)) == std::future_status::ready) break;
        throw AgentError("agent stopped");
      }
    }
    return fut.get();
  }

  fs::path state_path(std::string_view suffix) const {
    if (cfg_.ephemeral_state) return {};
    return cfg_.key_dir / (cfg_.name + std::string(suffix));
  }

  std::string relay_addr() const { return cfg_.relay_host + ":" + std::to_string(cfg_.relay_port); }

  void log(const std::string& line) {
    if (!cfg_.log) return;
    std::lock_guard<std::mutex> lock(log_mutex_);
    *cfg_.log << line << std::endl;
  }

  void emit(ChatEvent event) {
    history_.push_back(event);
    while (history_.size() > cfg_.history_limit) history_.pop_front();
    for (auto& [_, s] : subscribers_) s(event);
  }

  // Loop thread only.
  std::future<FetchResult> request_key(const std::string& peer) {
    if (!registered_) throw SendError(SendError::Kind::kNotConnected, "not connected to relay " + relay_addr());
    auto p = std::make_shared<std::promise<FetchResult>>();
    auto fut = p->get_future();
    fetches_[peer].push_back(std::move(p));
    write_frame(wire::make_fetch_key(peer));
    return fut;
  }

  PeerRecord pin_fetched(const std::string& peer, const FetchResult& result) {
    if (!result.key) {
      switch (result.error) {
        case SendError::Kind::kUnknownPeer:
          throw SendError(result.error, "UNKNOWN_PEER: relay has no key for " + peer);
        case SendError::Kind::kNotConnected:
          throw SendError(result.error, "connection lost while fetching key for " + peer);
        default:
          throw SendError(result.error, "relay returned an unreadable key for " + peer);
      }
    }
    std::optional<kem::KemPublicKey> pk;
    try {
      pk.emplace(*result.key);
    } catch (const kem::InvalidKeyMaterial& e) {
      throw SendError(SendError::Kind::kInvalid, "relay returned an invalid key for " + peer + ": " + e.what());
    }
    switch (peers_.observe(peer, *pk, now_ms())) {
      case PinResult::kPinnedNew:
        log("Pinned " + peer + " fingerprint " + fingerprint_display(peers_.find(peer)->fingerprint));
        break;
      case PinResult::kMatches:
        break;
      case PinResult::kMismatch: {
        const PeerRecord* rec = peers_.find(peer);
        log("SECURITY WARNING: key for " + peer + " changed. pinned " + fingerprint_display(rec->fingerprint) +
            ", offered " + fingerprint_display(rec->pending->fingerprint) + ". Sending blocked until repin.");
        throw SendError(SendError::Kind::kFingerprintMismatch, "FINGERPRINT_MISMATCH for " + peer, rec->fingerprint,
                        rec->pending->fingerprint);
      }
    }
    return *peers_.find(peer);
  }

  void connect() {
    if (stopping_) return;
    resolver_.async_resolve(cfg_.relay_host, std::to_string(cfg_.relay_port),
                            [this](boost::system::error_code ec, tcp::resolver::results_type results) {
                              if (stopping_) return;
                              if (ec) return on_connect_failed(ec);
                              asio::async_connect(socket_, results,
                                                  [this](boost::system::error_code ec2, const tcp::endpoint&) {
                                                    if (stopping_) return;
                                                    if (ec2) return on_connect_failed(ec2);
                                                    on_connected();
                                                  });
                            });
  }

  void on_connect_failed(const boost::system::error_code& ec) {
    log("Relay " + relay_addr() + " unreachable: " + ec.message());
    boost::system::error_code ignored;
    socket_.close(ignored);
    schedule_reconnect();
  }

  void on_connected() {
    ++generation_;
    connected_ = true;
    boost::system::error_code ec;
    socket_.set_option(tcp::no_delay(true), ec);
    read(generation_);
    write_frame(wire::make_register(cfg_.name));
  }

  void schedule_reconnect() {
    if (stopping_) return;
    retry_timer_.expires_after(backoff_);
    backoff_ = std::min(backoff_ * 2, cfg_.backoff_max);
    retry_timer_.async_wait([this](boost::system::error_code ec) {
      if (!ec && !stopping_) connect();
    });
  }

  void on_disconnected(std::uint64_t gen, const std::string& why) {
    if (gen != generation_ || !connected_) return;
    ++generation_;
    connected_ = false;
    registered_ = false;
    writing_ = false;
    outbox_.clear();
    readbuf_.consume(readbuf_.size());
    boost::system::error_code ec;
    socket_.close(ec);
    for (auto& [_, queue] : fetches_) {
      for (auto& p : queue) p->set_value(FetchResult{std::nullopt, SendError::Kind::kNotConnected});
    }
    fetches_.clear();
    if (stopping_) return;
    ++reconnects_;
    log("Disconnected from relay (" + why + "); reconnecting");
    schedule_reconnect();
  }

  void read(std::uint64_t gen) {
    asio::async_read_until(socket_, readbuf_, '\n', [this, gen](boost::system::error_code ec, std::size_t n) {
      if (gen != generation_) return;
      if (ec) return on_disconnected(gen, ec.message());
      std::string line(asio::buffers_begin(readbuf_.data()), asio::buffers_begin(readbuf_.data()) + n - 1);
      readbuf_.consume(n);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      on_line(line);
      if (gen == generation_) read(gen);
    });
  }

  void write_frame(const wire::Frame& frame) {
    if (!connected_) return;
    outbox_.push_back(wire::encode_frame(frame) + "\n");
    if (!writing_) write(generation_);
  }

  void write(std::uint64_t gen) {
    writing_ = true;
    asio::async_write(socket_, asio::buffer(outbox_.front()), [this, gen](boost::system::error_code ec, std::size_t) {
      if (gen != generation_) return;
      if (ec) return on_disconnected(gen, ec.message());
      outbox_.pop_front();
      if (outbox_.empty()) writing_ = false;
      else write(gen);
    });
  }

  void on_line(std::string_view line) {
    if (line.empty()) return;
    auto frame = wire::decode_frame(line);
    if (!frame) {
      log("Ignoring malformed frame from relay: " + frame.error());
      return;
    }
    switch (frame->type) {
      case wire::FrameType::kRegisterOk:
        registered_ = true;
        backoff_ = cfg_.backoff_initial;
        write_frame(wire::make_publish_key(base64_encode(id_.keys.public_key.view())));
        log("Registered with relay " + relay_addr() + " as " + cfg_.name);
        if (!start_signalled_) {
          start_signalled_ = true;
          start_promise_.set_value();
        }
        break;
      case wire::FrameType::kKey:
        complete_fetch(frame->peer, base64_decode(frame->payload), SendError::Kind::kInvalid);
        break;
      case wire::FrameType::kDeliver:
        on_deliver(frame->peer, frame->payload);
        break;
      case wire::FrameType::kError:
        on_error(*frame);
        break;
      default:
        log("Ignoring unexpected " + std::string(wire::to_string(frame->type)) + " frame from relay");
        break;
    }
  }

  void complete_fetch(const std::string& peer, std::optional<Bytes> key, SendError::Kind if_missing) {
    auto it = fetches_.find(peer);
    if (it == fetches_.end() || it->second.empty()) return;
    auto p = std::move(it->second.front());
    it->second.pop_front();
    if (it->second.empty()) fetches_.erase(it);
    p->set_value(FetchResult{std::move(key), if_missing});
  }

  void on_error(const wire::Frame& frame) {
    const std::string detail = frame.detail.empty() ? "" : " (" + frame.detail + ")";
    switch (frame.code.value_or(wire::ErrorCode::kMalformed)) {
      case wire::ErrorCode::kUnknownPeer:
        complete_fetch(frame.peer, std::nullopt, SendError::Kind::kUnknownPeer);
        log("Relay: UNKNOWN_PEER " + frame.peer + detail);
        break;
      case wire::ErrorCode::kNameTaken:
        log("Relay: NAME_TAKEN " + cfg_.name + detail);
        if (!start_signalled_) {
          start_signalled_ = true;
          start_promise_.set_exception(
              std::make_exception_ptr(AgentError("relay refused registration: name '" + cfg_.name + "' is taken")));
        } else {
          on_disconnected(generation_, "name taken");
        }
        break;
      case wire::ErrorCode::kQueueFull:
        log("Relay: QUEUE_FULL for " + frame.peer + detail);
        break;
      case wire::ErrorCode::kMalformed:
        log("Relay: MALFORMED" + detail);
        break;
    }
  }

  void on_deliver(const std::string& from, const std::string& payload) {
    auto reject = [&](std::uint64_t seq, std::string cls) {
      log("Rejected message from " + from + ": " + cls);
      emit(ChatEvent{EventDirection::kInbound, from, std::nullopt, std::move(cls), seq, now_ms()});
    };
    auto raw = base64_decode(payload);
    if (!raw) return reject(0, "Malformed");
    auto env = envelope::decode_envelope(*raw);
    if (!env) return reject(0, "Malformed");
    const auto& h = env->header;
    if (h.recipient != cfg_.name || h.sender != from) return reject(h.seq, "Malformed");
    auto& window = replay_.window(h.sender);
    auto opened = opener_.open(*env, window);
    if (!opened) return reject(h.seq, failure_class(opened.error()));
    replay_.save();
    std::string text = pqe::to_string(*opened);
    secure_zero(opened->data(), opened->size());
    emit(ChatEvent{EventDirection::kInbound, from, std::move(text), std::nullopt, h.seq, now_ms()});
  }

  AgentConfig cfg_;
  EntropySource& rng_;
  Identity id_;
  PeerStore peers_;
  SeqStore seqs_;
  ReplayStore replay_;
  envelope::EnvelopeSealer sealer_;
  envelope::EnvelopeOpener opener_;

  asio::io_context io_;
  std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work_;
  tcp::socket socket_;
  tcp::resolver resolver_;
  asio::steady_timer retry_timer_;
  asio::streambuf readbuf_;
  std::deque<std::string> outbox_;
  std::thread thread_;
  std::mutex log_mutex_;

  std::atomic<bool> started_{false};
  std::atomic<bool> loop_running_{false};
  bool stopping_ = false;
  bool writing_ = false;
  bool connected_ = false;
  bool registered_ = false;
  bool start_signalled_ = false;
  std::promise<void> start_promise_;
  std::uint64_t generation_ = 0;
  std::uint64_t reconnects_ = 0;
  std::chrono::milliseconds backoff_;

  std::map<std::string, std::deque<std::shared_ptr<std::promise<FetchResult>>>> fetches_;
  std::map<std::uint64_t, Subscriber> subscribers_;
  std::uint64_t next_subscriber_ = 0;
  std::deque<ChatEvent> history_;
};

ClientAgent::ClientAgent(AgentConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
ClientAgent::~ClientAgent() = default;

void ClientAgent::start() { impl_->start(); }
void ClientAgent::stop() { impl_->stop(); }
const Identity& ClientAgent::identity() const { return impl_->identity(); }
PeerRecord ClientAgent::resolve_peer(const std::string& peer) { return impl_->resolve_peer(peer); }
std::uint64_t ClientAgent::send_message(const std::string& peer, const std::string& text) {
  return impl_->send_message(peer, text);
}
std::vector<PeerRecord> ClientAgent::peers() { return impl_->peers(); }
bool ClientAgent::repin(const std::string& peer) { return impl_->repin(peer); }
std::uint64_t ClientAgent::subscribe(Subscriber subscriber) { return impl_->subscribe(std::move(subscriber)); }
void ClientAgent::unsubscribe(std::uint64_t id) { impl_->unsubscribe(id); }
std::vector<ChatEvent> ClientAgent::subscribe_with_history(Subscriber subscriber, std::uint64_t& id) {
  return impl_->subscribe_with_history(std::move(subscriber), id);
}
std::vector<ChatEvent> ClientAgent::history() { return impl_->history(); }
AgentStatus ClientAgent::status() { return impl_->status(); }

}  // namespace pqe::client
