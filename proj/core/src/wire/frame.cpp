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

#include "pqe/wire/frame.hpp"

#include <array>
#include <utility>

#include "json.hpp"

namespace pqe::wire {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<FrameType, std::string_view>, 8> kTypeNames = {{
    {FrameType::kRegister, "REGISTER"},
    {FrameType::kRegisterOk, "REGISTER_OK"},
    {FrameType::kFetchKey, "FETCH_KEY"},
    {FrameType::kKey, "KEY"},
    {FrameType::kPublishKey, "PUBLISH_KEY"},
    {FrameType::kSend, "SEND"},
    {FrameType::kDeliver, "DELIVER"},
    {FrameType::kError, "ERROR"},
}};

constexpr std::array<std::pair<ErrorCode, std::string_view>, 4> kCodeNames = {{
    {ErrorCode::kUnknownPeer, "UNKNOWN_PEER"},
    {ErrorCode::kNameTaken, "NAME_TAKEN"},
    {ErrorCode::kMalformed, "MALFORMED"},
    {ErrorCode::kQueueFull, "QUEUE_FULL"},
}};

std::optional<FrameType> parse_type(std::string_view s) {
  for (const auto& [t, n] : kTypeNames) {
    if (n == s) return t;
  }
  return std::nullopt;
}

std::optional<ErrorCode> parse_code(std::string_view s) {
  for (const auto& [c, n] : kCodeNames) {
    if (n == s) return c;
  }
  return std::nullopt;
}

bool get_string(const json& j, const char* key, std::string& out) {
  auto it = j.find(key);
  if (it == j.end()) return true;
  if (!it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

}  // namespace

std::string_view to_string(FrameType type) {
  for (const auto& [t, n] : kTypeNames) {
    if (t == type) return n;
  }
  return "UNKNOWN";
}

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, n] : kCodeNames) {
    if (c == code) return n;
  }
  return "UNKNOWN";
}

bool is_valid_name(std::string_view name) {
  if (name.empty() || name.size() > kMaxNameSize) return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string encode_frame(const Frame& frame) {
  json j;
  j["type"] = to_string(frame.type);
  if (!frame.name.empty()) j["name"] = frame.name;
  if (!frame.peer.empty()) j["peer"] = frame.peer;
  if (!frame.payload.empty()) j["payload"] = frame.payload;
  if (frame.code) j["code"] = to_string(*frame.code);
  if (!frame.detail.empty()) j["detail"] = frame.detail;
  // Replacement keeps the line valid UTF-8 even if a peer echoes junk.
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Expected<Frame, std::string> decode_frame(std::string_view line) {
  if (line.size() > kMaxLineSize) return unexpected(std::string("frame too large"));
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return unexpected(std::string("not a JSON object"));

  std::string type_name, code_name;
  Frame f;
  if (!get_string(j, "type", type_name) || !get_string(j, "name", f.name) || !get_string(j, "peer", f.peer) ||
      !get_string(j, "payload", f.payload) || !get_string(j, "code", code_name) ||
      !get_string(j, "detail", f.detail)) {
    return unexpected(std::string("non-string field"));
  }
  auto type = parse_type(type_name);
  if (!type) return unexpected("unknown frame type '" + type_name + "'");
  f.type = *type;
  if (!code_name.empty()) {
    f.code = parse_code(code_name);
    if (!f.code) return unexpected("unknown error code '" + code_name + "'");
  }
  if (f.name.size() > kMaxNameSize || f.peer.size() > kMaxNameSize) return unexpected(std::string("name too long"));
  if (f.payload.size() > kMaxPayloadSize) return unexpected(std::string("payload too large"));

  switch (f.type) {
    case FrameType::kRegister:
    case FrameType::kRegisterOk:
      if (f.name.empty()) return unexpected(std::string("missing name"));
      break;
    case FrameType::kPublishKey:
      if (f.payload.empty()) return unexpected(std::string("missing payload"));
      break;
    case FrameType::kFetchKey:
      if (f.peer.empty()) return unexpected(std::string("missing peer"));
      break;
    case FrameType::kKey:
    case FrameType::kSend:
    case FrameType::kDeliver:
      if (f.peer.empty() || f.payload.empty()) return unexpected(std::string("missing peer or payload"));
      break;
    case FrameType::kError:
      if (!f.code) return unexpected(std::string("missing code"));
      break;
  }
  return f;
}

Frame make_register(std::string name) { return Frame{FrameType::kRegister, std::move(name), {}, {}, {}, {}}; }
Frame make_register_ok(std::string name) { return Frame{FrameType::kRegisterOk, std::move(name), {}, {}, {}, {}}; }
Frame make_publish_key(std::string payload) {
  return Frame{FrameType::kPublishKey, {}, {}, std::move(payload), {}, {}};
}
Frame make_fetch_key(std::string peer) { return Frame{FrameType::kFetchKey, {}, std::move(peer), {}, {}, {}}; }
Frame make_key(std::string peer, std::string payload) {
  return Frame{FrameType::kKey, {}, std::move(peer), std::move(payload), {}, {}};
}
Frame make_send(std::string peer, std::string payload) {
  return Frame{FrameType::kSend, {}, std::move(peer), std::move(payload), {}, {}};
}
Frame make_deliver(std::string from, std::string payload) {
  return Frame{FrameType::kDeliver, {}, std::move(from), std::move(payload), {}, {}};
}
Frame make_error(ErrorCode code, std::string peer, std::string detail) {
  return Frame{FrameType::kError, {}, std::move(peer), {}, code, std::move(detail)};
}

}  // namespace pqe::wire
