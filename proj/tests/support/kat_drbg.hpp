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

// AES-256 CTR DRBG (no derivation function, no prediction resistance) as
// used to generate the ML-KEM known-answer files.

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "pqe/common/bytes.hpp"

namespace pqe::testing {

class KatDrbg {
 public:
  explicit KatDrbg(std::span<const std::uint8_t, 48> entropy);
  void random_bytes(std::span<std::uint8_t> out);
  Bytes random_bytes(std::size_t n);

 private:
  void update(const std::uint8_t* provided);
  void block(std::uint8_t out[16]);

  std::array<std::uint8_t, 32> key_{};
  std::array<std::uint8_t, 16> v_{};
};

/// The first `count` records of the ML-KEM-768 KAT file (uppercase hex,
/// "count = i / seed / pk / sk / ct / ss" lines, no header), produced by
/// replaying the DRBG through the deterministic KEM entry points.
std::string mlkem768_kat_records(std::size_t count);

}  // namespace pqe::testing
