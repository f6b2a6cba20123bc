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

// Relay frames: one JSON object per line.
//
//   {"type":"REGISTER","name":"alice"}
//   {"type":"REGISTER_OK","name":"alice"}
//   {"type":"PUBLISH_KEY","payload":"<base64 public key>"}
//   {"type":"FETCH_KEY","peer":"bob"}
//   {"type":"KEY","peer":"bob","payload":"<base64 public key>"}
//   {"type":"SEND","peer":"bob","payload":"<base64 envelope>"}
//   {"type":"DELIVER","peer":"alice","payload":"<base64 envelope>"}
//   {"type":"ERROR","code":"UNKNOWN_PEER","peer":"bob","detail":"..."}
//
// SEND names the recipient in `peer`; DELIVER names the sender there.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "pqe/common/expected.hpp"

namespace pqe::wire {

inline constexpr std::size_t kMaxNameSize = 64;
inline constexpr std::size_t kPublicKeySize = 1184;
/// Cap on a base64 payload (an encoded envelope).
inline constexpr std::size_t kMaxPayloadSize = std::size_t{2} << 20;
/// Cap on one frame line, excluding the newline.
inline constexpr std::size_t kMaxLineSize = kMaxPayloadSize + 1024;

enum class FrameType {
  kRegister,
  kRegisterOk,
  kFetchKey,
  kKey,
  kPublishKey,
  kSend,
  kDeliver,
  kError,
};

enum class ErrorCode {
  kUnknownPeer,
  kNameTaken,
  kMalformed,
  kQueueFull,
};

struct Frame {
  FrameType type = FrameType::kError;
  std::string name;
  std::string peer;
  std::string payload;
  std::optional<ErrorCode> code;
  std::string detail;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::string_view to_string(FrameType type);
std::string_view to_string(ErrorCode code);

/// Client names: [a-z0-9_-]{1,64}.
bool is_valid_name(std::string_view name);

/// Single line, no trailing newline.
std::string encode_frame(const Frame& frame);

/// Parses one line and checks that the fields required by the frame type
/// are present. Payload contents are not inspected.
Expected<Frame, std::string> decode_frame(std::string_view line);

Frame make_register(std::string name);
Frame make_register_ok(std::string name);
Frame make_publish_key(std::string payload);
Frame make_fetch_key(std::string peer);
Frame make_key(std::string peer, std::string payload);
Frame make_send(std::string peer, std::string payload);
Frame make_deliver(std::string from, std::string payload);
Frame make_error(ErrorCode code, std::string peer = {}, std::string detail = {});

}  // namespace pqe::wire
