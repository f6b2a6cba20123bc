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

#pragma once

// Primitive and end-to-end latency measurements through the public module
// interfaces, with the published reference figures alongside.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pqe/bench/stats.hpp"

namespace pqe::bench {

inline constexpr std::size_t kMinTrials = 100;
inline constexpr std::size_t kMinWarmup = 10;
inline constexpr double kStabilityLimit = 5.0;
inline constexpr double kLinearityLimit = 0.9;
inline constexpr std::size_t kLinearFromBytes = 10 * 1024;

struct BenchOptions {
  /// Raised to kMinTrials if lower.
  std::size_t trials = kMinTrials;
  /// Raised to kMinWarmup if lower.
  std::size_t warmup = kMinWarmup;
  std::vector<std::size_t> sizes = {1024, 10 * 1024, 100 * 1024, 1024 * 1024};
  std::uint8_t envelope_version = 2;
  /// Progress lines. Null silences them.
  std::ostream* progress = nullptr;
};

struct Metric {
  std::string name;
  std::size_t size_bytes = 0;
  Summary summary;
};

struct CurveCheck {
  bool monotone = false;
  /// Fit over medians for sizes >= kLinearFromBytes.
  LinearFit fit;
  std::size_t fit_points = 0;
  /// Largest p95 / median across sizes.
  double worst_stability = 0;
};

struct BenchReport {
  std::string machine;
  std::vector<Metric> metrics;
  std::optional<CurveCheck> curve;

  const Metric* find(const std::string& name, std::size_t size_bytes) const;
};

std::string machine_descriptor();

/// kem_keygen, kem_encaps, kem_decaps, kdf_v1, kdf_v2, aead_seal, aead_open,
/// hybrid_seal and hybrid_open (the last four at 1 KiB).
BenchReport bench_primitives(const BenchOptions& options = {});

/// In-process relay on an ephemeral loopback port and two agents; one
/// e2e_latency metric per size, measured from send_message() to the
/// recipient's decrypted event.
BenchReport bench_end_to_end(const BenchOptions& options = {});

CurveCheck check_curve(const std::vector<Metric>& e2e);

/// metric,size_bytes,median_ms,p95_ms,trials
void write_csv(const BenchReport& report, std::ostream& out);

/// Human-readable table with the published figures next to each metric.
void write_comparison(const BenchReport& report, std::ostream& out);

}  // namespace pqe::bench
