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

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pqe/bench/bench.hpp"
#include "pqe/client/agent.hpp"
#include "pqe/client/console_api.hpp"
#include "pqe/relay/relay_server.hpp"

namespace {

std::mutex g_out_mutex;

void say(std::ostream& out, const std::string& line) {
  std::lock_guard<std::mutex> lock(g_out_mutex);
  out << line << std::endl;
}

struct HostPort {
  std::string host;
  std::uint16_t port;
};

HostPort parse_host_port(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size()) {
    throw CLI::ValidationError("address", "expected host:port, got '" + s + "'");
  }
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw CLI::ValidationError("address", "bad port in '" + s + "'");
  }
  if (port > 65535) throw CLI::ValidationError("address", "port out of range in '" + s + "'");
  return {s.substr(0, colon), static_cast<std::uint16_t>(port)};
}

std::size_t parse_size(std::string s) {
  std::size_t mult = 1;
  if (!s.empty() && (s.back() == 'K' || s.back() == 'k')) mult = 1024, s.pop_back();
  else if (!s.empty() && (s.back() == 'M' || s.back() == 'm')) mult = 1024 * 1024, s.pop_back();
  std::size_t used = 0;
  std::size_t v = std::stoul(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad size");
  return v * mult;
}

// Blocks SIGINT/SIGTERM in every thread and returns a waiter for them.
// Must run before any other thread is created.
sigset_t block_termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::signal(SIGPIPE, SIG_IGN);
  return set;
}

int wait_for_signal(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

int run_relay(const std::string& listen) {
  auto set = block_termination_signals();
  auto addr = parse_host_port(listen);
  pqe::relay::RelayOptions opts;
  opts.host = addr.host;
  opts.port = addr.port;
  opts.log = &std::cout;
  pqe::relay::RelayServer relay(opts);
  relay.listen();
  std::thread waiter([&] {
    wait_for_signal(set);
    relay.stop();
  });
  relay.run();
  // run() returns only after stop(), which the waiter issues.
  waiter.join();
  return 0;
}

struct ClientArgs {
  std::string name;
  std::string peer;
  std::string relay = "127.0.0.1:65432";
  std::string keys = ".";
  std::optional<std::uint16_t> console_port;
  std::string console_token;
  std::vector<std::string> pin_files;
  int kdf = 2;
  std::uint32_t rekey_every = 1;
  bool exit_on_eof = false;
};

int run_client(const ClientArgs& a) {
  auto set = block_termination_signals();
  auto addr = parse_host_port(a.relay);

  pqe::client::AgentConfig cfg;
  cfg.name = a.name;
  cfg.relay_host = addr.host;
  cfg.relay_port = addr.port;
  cfg.key_dir = a.keys;
  cfg.envelope_version = static_cast<std::uint8_t>(a.kdf);
  cfg.rekey_every = a.rekey_every;
  cfg.log = &std::cerr;
  for (const auto& f : a.pin_files) cfg.pin_files.emplace_back(f);

  std::unique_ptr<pqe::client::ClientAgent> agent;
  try {
    agent = std::make_unique<pqe::client::ClientAgent>(cfg);
  } catch (const std::exception& e) {
    say(std::cerr, std::string("error: ") + e.what());
    return 2;
  }
  const auto& id = agent->identity();
  say(std::cout, std::string(id.generated ? "Generated" : "Loaded") + " identity " + id.name + " fingerprint " +
                     pqe::client::fingerprint_display(id.fingerprint));

  agent->subscribe([](const pqe::client::ChatEvent& e) {
    if (e.direction == pqe::client::EventDirection::kInbound) say(std::cout, pqe::client::format_event(e));
  });
  try {
    agent->start();
  } catch (const std::exception& e) {
    say(std::cerr, std::string("error: ") + e.what());
    return 3;
  }

  std::unique_ptr<pqe::client::ConsoleApi> console;
  if (a.console_port) {
    pqe::client::ConsoleOptions copts;
    copts.port = *a.console_port;
    copts.token = a.console_token;
    console = std::make_unique<pqe::client::ConsoleApi>(*agent, copts);
    console->start();
    say(std::cout, "Console API on http://127.0.0.1:" + std::to_string(console->port()) + " token " +
                       console->token());
  }

  auto shutdown = [&] {
    if (console) console->stop();
    agent->stop();
  };

  std::thread waiter([&] {
    wait_for_signal(set);
    shutdown();
    std::cout.flush();
    std::_Exit(0);
  });
  waiter.detach();

  say(std::cout, "Client " + a.name + " ready. Type messages to send to " + a.peer + ".");
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "/quit") break;
    if (line == "/repin") {
      bool ok = agent->repin(a.peer);
      say(std::cout, ok ? "Re-pinned " + a.peer : "No changed key pending for " + a.peer);
      continue;
    }
    if (line == "/peers") {
      for (const auto& p : agent->peers()) {
        say(std::cout, p.name + " " + pqe::client::fingerprint_display(p.fingerprint) +
                           (p.pending ? " (changed key pending: " +
                                            pqe::client::fingerprint_display(p.pending->fingerprint) + ")"
                                      : ""));
      }
      continue;
    }
    try {
      agent->send_message(a.peer, line);
    } catch (const pqe::client::SendError& e) {
      if (e.kind() == pqe::client::SendError::Kind::kFingerprintMismatch) {
        say(std::cout, "! SECURITY WARNING: " + a.peer + "'s key changed (pinned " +
                           pqe::client::fingerprint_display(e.pinned_fingerprint()) + ", offered " +
                           pqe::client::fingerprint_display(e.offered_fingerprint()) +
                           "). Message not sent. Verify out of band, then /repin.");
      } else {
        say(std::cout, std::string("! not sent: ") + e.what());
      }
    } catch (const std::exception& e) {
      say(std::cout, std::string("! not sent: ") + e.what());
    }
  }
  if (a.exit_on_eof || line == "/quit") {
    shutdown();
    return 0;
  }
  // Stay online to receive until signalled.
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}

struct BenchArgs {
  std::string sizes = "1K,10K,100K,1M";
  std::size_t trials = pqe::bench::kMinTrials;
  std::size_t warmup = pqe::bench::kMinWarmup;
  std::string out;
  int kdf = 2;
  bool primitives_only = false;
};

int run_bench(const BenchArgs& a) {
  std::signal(SIGPIPE, SIG_IGN);
  pqe::bench::BenchOptions o;
  o.trials = a.trials;
  o.warmup = a.warmup;
  o.envelope_version = static_cast<std::uint8_t>(a.kdf);
  o.progress = &std::cerr;
  o.sizes.clear();
  std::stringstream ss(a.sizes);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      o.sizes.push_back(parse_size(item));
    } catch (const std::exception&) {
      say(std::cerr, "error: bad size '" + item + "'");
      return 2;
    }
  }
  if (o.trials < pqe::bench::kMinTrials) {
    say(std::cerr, "note: raising trials to " + std::to_string(pqe::bench::kMinTrials));
  }

  say(std::cerr, "primitives:");
  auto report = pqe::bench::bench_primitives(o);
  if (!a.primitives_only && !o.sizes.empty()) {
    say(std::cerr, "end to end:");
    auto e2e = pqe::bench::bench_end_to_end(o);
    report.metrics.insert(report.metrics.end(), e2e.metrics.begin(), e2e.metrics.end());
    report.curve = e2e.curve;
  }
  pqe::bench::write_comparison(report, std::cout);
  if (!a.out.empty()) {
    std::ofstream csv(a.out);
    if (!csv) {
      say(std::cerr, "error: cannot write " + a.out);
      return 2;
    }
    pqe::bench::write_csv(report, csv);
    say(std::cerr, "wrote " + a.out);
  }
  return 0;
}

int run_init(const std::string& name, const std::string& keys) {
  try {
    auto id = pqe::client::init_identity(name, keys);
    std::cout << (id.generated ? "Generated " : "Loaded ") << id.public_key_path.string() << " and "
              << id.private_key_path.string() << "\n"
              << "fingerprint " << pqe::client::fingerprint_display(id.fingerprint) << " (" << id.fingerprint
              << ")\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pqe: ML-KEM-768 + AES-256-GCM end-to-end encrypted messaging"};
  app.require_subcommand(1);

  std::string listen = "127.0.0.1:65432";
  auto* relay = app.add_subcommand("relay", "Run the relay server");
  relay->add_option("--listen", listen, "host:port to listen on")->capture_default_str();

  ClientArgs ca;
  auto* client = app.add_subcommand("client", "Run an interactive chat client");
  client->add_option("--name", ca.name, "Own name")->required();
  client->add_option("--peer", ca.peer, "Peer to chat with")->required();
  client->add_option("--relay", ca.relay, "Relay host:port")->capture_default_str();
  client->add_option("--keys", ca.keys, "Key directory")->capture_default_str();
  client->add_option("--console-port", ca.console_port, "Serve the console API on 127.0.0.1:PORT (0 = any)");
  client->add_option("--console-token", ca.console_token, "Console bearer token (default: random)");
  client->add_option("--pin-file", ca.pin_files, "Pin a peer public key file (<peer>_pub.pem)");
  client->add_option("--kdf", ca.kdf, "Key derivation version: 1 (SHA-256) or 2 (HKDF, context-bound)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  client->add_option("--rekey-every", ca.rekey_every, "Reuse one encapsulation for up to N messages")
      ->check(CLI::Range(1u, 1000000u))
      ->capture_default_str();
  client->add_flag("--exit-on-eof", ca.exit_on_eof, "Exit when standard input closes");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run latency benchmarks");
  bench->add_option("--sizes", ba.sizes, "Comma-separated message sizes (suffix K or M)")->capture_default_str();
  bench->add_option("--trials", ba.trials, "Trials per metric (minimum 100)")->capture_default_str();
  bench->add_option("--warmup", ba.warmup, "Warm-up iterations (minimum 10)")->capture_default_str();
  bench->add_option("--out", ba.out, "Write CSV report");
  bench->add_option("--kdf", ba.kdf, "Envelope key derivation version")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  bench->add_flag("--primitives-only", ba.primitives_only, "Skip the end-to-end curve");

  std::string init_name, init_keys = ".";
  auto* init = app.add_subcommand("init", "Create or load an identity and print its fingerprint");
  init->add_option("--name", init_name, "Own name")->required();
  init->add_option("--keys", init_keys, "Key directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*relay) return run_relay(listen);
    if (*client) return run_client(ca);
    if (*bench) return run_bench(ba);
    if (*init) return run_init(init_name, init_keys);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
