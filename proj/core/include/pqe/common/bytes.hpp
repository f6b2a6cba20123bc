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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pqe {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_string(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

/// Lowercase hex.
std::string to_hex(ByteView data);

/// Accepts upper or lower case; nullopt on odd length or non-hex characters.
std::optional<Bytes> from_hex(std::string_view hex);

/// Standard alphabet, padded.
std::string base64_encode(ByteView data);

/// Strict decoder: standard alphabet, mandatory padding, no whitespace, and
/// canonical trailing bits. Anything else yields nullopt.
std::optional<Bytes> base64_decode(std::string_view text);

/// Overwrites memory in a way the optimizer may not elide.
void secure_zero(void* data, std::size_t size);

/// Constant-time equality for equal-length inputs.
bool constant_time_equal(ByteView a, ByteView b);

}  // namespace pqe
