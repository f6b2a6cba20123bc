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

#include <benchmark/benchmark.h>

#include "pqe/envelope/envelope.hpp"
#include "pqe/kem/kem.hpp"
#include "pqe/symmetric/symmetric.hpp"

namespace {

using namespace pqe;

Bytes random_bytes(std::size_t n) {
  Bytes b(n);
  system_entropy().fill(b);
  return b;
}

void BM_KemKeygen(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kem::kem_generate_keypair(system_entropy()));
}
BENCHMARK(BM_KemKeygen);

void BM_KemEncaps(benchmark::State& state) {
  auto kp = kem::kem_generate_keypair(system_entropy());
  for (auto _ : state) benchmark::DoNotOptimize(kem::kem_encapsulate(kp.public_key, system_entropy()));
}
BENCHMARK(BM_KemEncaps);

void BM_KemDecaps(benchmark::State& state) {
  auto kp = kem::kem_generate_keypair(system_entropy());
  auto enc = kem::kem_encapsulate(kp.public_key, system_entropy());
  for (auto _ : state) benchmark::DoNotOptimize(kem::kem_decapsulate(kp.secret_key, enc.ciphertext));
}
BENCHMARK(BM_KemDecaps);

void BM_Kdf(benchmark::State& state) {
  auto mode = static_cast<symmetric::DerivationMode>(state.range(0));
  kem::SharedSecret ss(random_bytes(32));
  Bytes ctx = symmetric::v2_context("alice", "bob", static_cast<std::uint8_t>(mode));
  for (auto _ : state) benchmark::DoNotOptimize(symmetric::derive_session_key(ss, mode, ctx));
}
BENCHMARK(BM_Kdf)->Arg(1)->Arg(2);

void BM_AeadSeal(benchmark::State& state) {
  Bytes k = random_bytes(32);
  symmetric::SessionKey key(std::span<const std::uint8_t, symmetric::kKeySize>(k.data(), symmetric::kKeySize),
                            symmetric::DerivationMode::kV2ContextBound);
  Bytes pt = random_bytes(static_cast<std::size_t>(state.range(0)));
  auto nonce = symmetric::random_nonce(system_entropy());
  for (auto _ : state) benchmark::DoNotOptimize(symmetric::aead_seal(key, nonce, pt, {}));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_AeadSeal)->Arg(1024)->Arg(64 * 1024)->Arg(1024 * 1024);

void BM_HybridSeal(benchmark::State& state) {
  auto kp = kem::kem_generate_keypair(system_entropy());
  Bytes pt = random_bytes(static_cast<std::size_t>(state.range(0)));
  envelope::EnvelopeHeader h{envelope::kVersionV2, "alice", "bob", 1};
  for (auto _ : state) benchmark::DoNotOptimize(envelope::hybrid_seal(kp.public_key, h, pt, system_entropy()));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_HybridSeal)->Arg(1024)->Arg(1024 * 1024);

void BM_HybridOpen(benchmark::State& state) {
  auto kp = kem::kem_generate_keypair(system_entropy());
  Bytes pt = random_bytes(static_cast<std::size_t>(state.range(0)));
  auto env = envelope::hybrid_seal(kp.public_key, {envelope::kVersionV2, "alice", "bob", 1}, pt, system_entropy());
  for (auto _ : state) {
    envelope::ReplayWindow w;
    benchmark::DoNotOptimize(envelope::hybrid_open(kp.secret_key, env, w));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_HybridOpen)->Arg(1024)->Arg(1024 * 1024);

}  // namespace

BENCHMARK_MAIN();
