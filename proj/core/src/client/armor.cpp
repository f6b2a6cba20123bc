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

#include "pqe/client/keystore.hpp"
#include "pqe/symmetric/symmetric.hpp"

namespace pqe::client {
namespace {

std::string begin_line(std::string_view label) { return "-----BEGIN " + std::string(label) + "-----"; }
std::string end_line(std::string_view label) { return "-----END " + std::string(label) + "-----"; }

}  // namespace

std::string encode_armor(std::string_view label, ByteView data) {
  std::string b64 = base64_encode(data);
  std::string out = begin_line(label) + "\n";
  for (std::size_t i = 0; i < b64.size(); i += 64) {
    out.append(b64, i, 64);
    out.push_back('\n');
  }
  out += end_line(label) + "\n";
  return out;
}

Expected<Bytes, std::string> decode_armor(std::string_view label, std::string_view text) {
  const std::string begin = begin_line(label);
  const std::string end = end_line(label);
  auto b = text.find(begin);
  if (b == std::string_view::npos) return unexpected("missing '" + begin + "'");
  auto body_start = b + begin.size();
  auto e = text.find(end, body_start);
  if (e == std::string_view::npos) return unexpected("missing '" + end + "'");

  std::string b64;
  for (char c : text.substr(body_start, e - body_start)) {
    if (c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
    b64.push_back(c);
  }
  auto bytes = base64_decode(b64);
  if (!bytes) return unexpected(std::string("armor body is not valid base64"));
  return std::move(*bytes);
}

std::string fingerprint(ByteView public_key) { return to_hex(symmetric::sha256(public_key)); }

std::string fingerprint_display(std::string_view fingerprint_hex) {
  std::string out;
  for (std::size_t i = 0; i < 16 && i < fingerprint_hex.size(); ++i) {
    if (i > 0 && i % 4 == 0) out.push_back(' ');
    out.push_back(fingerprint_hex[i]);
  }
  return out;
}

}  // namespace pqe::client
