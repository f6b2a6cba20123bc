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

#include "pqe/bench/bench.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "pqe/client/agent.hpp"
#include "pqe/envelope/envelope.hpp"
#include "pqe/kem/kem.hpp"
#include "pqe/relay/relay_server.hpp"
#include "pqe/symmetric/symmetric.hpp"

namespace pqe::bench {
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <class Fn>
Summary measure(const BenchOptions& o, Fn&& fn) {
  const std::size_t warmup = std::max(o.warmup, kMinWarmup);
  const std::size_t trials = std::max(o.trials, kMinTrials);
  for (std::size_t i = 0; i < warmup; ++i) fn();
  std::vector<double> samples;
  samples.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    auto t0 = Clock::now();
    fn();
    samples.push_back(elapsed_ms(t0));
  }
  return summarize(samples);
}

Bytes random_bytes(std::size_t n) {
  Bytes b(n);
  system_entropy().fill(b);
  return b;
}

std::string random_text(std::size_t n) {
  static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789 ";
  Bytes raw = random_bytes(n);
  std::string s(n, ' ');
  for (std::size_t i = 0; i < n; ++i) s[i] = kAlphabet[raw[i] % kAlphabet.size()];
  return s;
}

struct Reference {
  const char* published;
};

const std::map<std::string, Reference>& references() {
  static const std::map<std::string, Reference> refs = {
      {"kem_keygen", {"~2 ms"}},
      {"kem_encaps", {"~3.0 ms (table); 1.8-1.9 ms (analysis)"}},
      {"kem_decaps", {"~3.2 ms (table); 1.8-1.9 ms (analysis)"}},
      {"kdf_v1", {"0.02 ms"}},
      {"kdf_v2", {"0.02 ms (v1 figure)"}},
      {"e2e_latency", {"single-digit ms for small messages"}},
  };
  return refs;
}

void progress(const BenchOptions& o, const Metric& m) {
  if (!o.progress) return;
  *o.progress << "  " << std::left << std::setw(12) << m.name << std::right << std::setw(9) << m.size_bytes
              << " B  median " << std::fixed << std::setprecision(4) << m.summary.median_ms << " ms  p95 "
              << m.summary.p95_ms << " ms  (" << m.summary.trials << " trials)" << std::endl;
}

// Inbound events observed by the receiving agent, keyed by sequence number.
class Inbox {
 public:
  void push(const client::ChatEvent& e) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      seen_[e.seq] = e.text.has_value();
    }
    cv_.notify_all();
  }

  bool wait(std::uint64_t seq, std::chrono::milliseconds timeout) {
    std::unique_lock<std::mutex> lock(mutex_);
    bool arrived = cv_.wait_for(lock, timeout, [&] { return seen_.count(seq) > 0; });
    bool ok = arrived && seen_[seq];
    seen_.erase(seq);
    return ok;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::uint64_t, bool> seen_;
};

}  // namespace

const Metric* BenchReport::find(const std::string& name, std::size_t size_bytes) const {
  for (const auto& m : metrics) {
    if (m.name == name && m.size_bytes == size_bytes) return &m;
  }
  return nullptr;
}

std::string machine_descriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  std::ostringstream ss;
  ss << cpu << ", " << std::thread::hardware_concurrency() << " hw threads";
#if defined(__clang__)
  ss << ", clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  ss << ", gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#endif
  return ss.str();
}

BenchReport bench_primitives(const BenchOptions& o) {
  BenchReport report;
  report.machine = machine_descriptor();
  auto add = [&](std::string name, std::size_t size, Summary s) {
    report.metrics.push_back(Metric{std::move(name), size, s});
    progress(o, report.metrics.back());
  };
  auto& rng = system_entropy();

  auto kp = kem::kem_generate_keypair(rng);
  add("kem_keygen", 0, measure(o, [&] { (void)kem::kem_generate_keypair(rng); }));

  auto enc = kem::kem_encapsulate(kp.public_key, rng);
  add("kem_encaps", 0, measure(o, [&] { (void)kem::kem_encapsulate(kp.public_key, rng); }));
  add("kem_decaps", 0, measure(o, [&] { (void)kem::kem_decapsulate(kp.secret_key, enc.ciphertext); }));

  const Bytes ctx = symmetric::v2_context("alice", "bob", 2);
  add("kdf_v1", 0, measure(o, [&] {
        (void)symmetric::derive_session_key(enc.shared_secret, symmetric::DerivationMode::kV1RawHash, {});
      }));
  add("kdf_v2", 0, measure(o, [&] {
        (void)symmetric::derive_session_key(enc.shared_secret, symmetric::DerivationMode::kV2ContextBound, ctx);
      }));

  constexpr std::size_t kSize = 1024;
  const Bytes pt = random_bytes(kSize);
  const Bytes aad = random_bytes(32);
  auto key = symmetric::derive_session_key(enc.shared_secret, symmetric::DerivationMode::kV2ContextBound, ctx);
  auto nonce = symmetric::random_nonce(rng);
  auto sealed = symmetric::aead_seal(key, nonce, pt, aad);
  add("aead_seal", kSize, measure(o, [&] { (void)symmetric::aead_seal(key, nonce, pt, aad); }));
  add("aead_open", kSize, measure(o, [&] { (void)symmetric::aead_open(key, sealed, aad); }));

  envelope::EnvelopeHeader header{o.envelope_version, "alice", "bob", 1};
  auto env = envelope::hybrid_seal(kp.public_key, header, pt, rng);
  add("hybrid_seal", kSize, measure(o, [&] { (void)envelope::hybrid_seal(kp.public_key, header, pt, rng); }));
  add("hybrid_open", kSize, measure(o, [&] {
        envelope::ReplayWindow fresh;
        (void)envelope::hybrid_open(kp.secret_key, env, fresh);
      }));
  return report;
}

BenchReport bench_end_to_end(const BenchOptions& o) {
  BenchReport report;
  report.machine = machine_descriptor();

  Bytes tag = random_bytes(6);
  const fs::path dir = fs::temp_directory_path() / ("pqe-bench-" + to_hex(tag));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{dir};

  relay::RelayOptions ropts;
  ropts.port = 0;
  relay::RelayServer relay(ropts);
  relay.start();

  auto make_agent = [&](const std::string& name) {
    client::AgentConfig cfg;
    cfg.name = name;
    cfg.relay_port = relay.port();
    cfg.key_dir = dir;
    cfg.envelope_version = o.envelope_version;
    cfg.ephemeral_state = true;
    cfg.request_timeout = std::chrono::milliseconds(10000);
    return std::make_unique<client::ClientAgent>(cfg);
  };
  auto alice = make_agent("bench_alice");
  auto bob = make_agent("bench_bob");
  alice->start();
  bob->start();

  Inbox inbox;
  bob->subscribe([&](const client::ChatEvent& e) {
    if (e.direction == client::EventDirection::kInbound) inbox.push(e);
  });

  for (std::size_t size : o.sizes) {
    const std::string text = random_text(size);
    bool failed = false;
    Summary s = measure(o, [&] {
      auto seq = alice->send_message("bench_bob", text);
      if (!inbox.wait(seq, std::chrono::milliseconds(10000))) failed = true;
    });
    if (failed) throw std::runtime_error("end-to-end delivery failed at " + std::to_string(size) + " bytes");
    report.metrics.push_back(Metric{"e2e_latency", size, s});
    progress(o, report.metrics.back());
  }

  alice->stop();
  bob->stop();
  relay.stop();
  report.curve = check_curve(report.metrics);
  return report;
}

CurveCheck check_curve(const std::vector<Metric>& e2e) {
  std::vector<const Metric*> pts;
  for (const auto& m : e2e) {
    if (m.name == "e2e_latency") pts.push_back(&m);
  }
  std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->size_bytes < b->size_bytes; });

  CurveCheck c;
  c.monotone = true;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0 && pts[i]->summary.median_ms < pts[i - 1]->summary.median_ms) c.monotone = false;
    if (pts[i]->summary.median_ms > 0) {
      c.worst_stability = std::max(c.worst_stability, pts[i]->summary.p95_ms / pts[i]->summary.median_ms);
    }
    if (pts[i]->size_bytes >= kLinearFromBytes) {
      xs.push_back(static_cast<double>(pts[i]->size_bytes));
      ys.push_back(pts[i]->summary.median_ms);
    }
  }
  c.fit = fit_linear(xs, ys);
  c.fit_points = xs.size();
  return c;
}

void write_csv(const BenchReport& report, std::ostream& out) {
  out << "metric,size_bytes,median_ms,p95_ms,trials\n";
  for (const auto& m : report.metrics) {
    out << m.name << ',' << m.size_bytes << ',' << std::fixed << std::setprecision(6) << m.summary.median_ms << ','
        << m.summary.p95_ms << ',' << m.summary.trials << '\n';
  }
  out << std::defaultfloat;
}

void write_comparison(const BenchReport& report, std::ostream& out) {
  out << "machine: " << report.machine << "\n";
  out << std::left << std::setw(13) << "metric" << std::right << std::setw(10) << "size_B" << std::setw(13)
      << "median_ms" << std::setw(13) << "p95_ms" << std::setw(8) << "trials" << "  published\n";
  for (const auto& m : report.metrics) {
    auto ref = references().find(m.name);
    out << std::left << std::setw(13) << m.name << std::right << std::setw(10) << m.size_bytes << std::fixed
        << std::setprecision(4) << std::setw(13) << m.summary.median_ms << std::setw(13) << m.summary.p95_ms
        << std::setw(8) << m.summary.trials << "  " << (ref == references().end() ? "-" : ref->second.published) << "\n";
  }
  if (report.curve) {
    const auto& c = *report.curve;
    out << "curve: monotone=" << (c.monotone ? "yes" : "no") << " r2(>=" << kLinearFromBytes / 1024
        << " KiB, " << c.fit_points << " points)=" << std::setprecision(4) << c.fit.r_squared
        << " slope=" << std::setprecision(6) << c.fit.slope * 1024.0 << " ms/KiB worst p95/median="
        << std::setprecision(2) << c.worst_stability << "\n";
  }
  out << std::defaultfloat;
}

}  // namespace pqe::bench
