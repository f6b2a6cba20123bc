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

// Man-in-the-middle TCP proxy for newline-delimited frames. Every line in
// either direction passes through an optional transform that may rewrite
// or drop it; all lines are recorded as they were forwarded.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pqe::testing {

class LineProxy {
 public:
  enum class Direction { kToRelay, kToClient };
  using Transform = std::function<std::optional<std::string>(Direction, const std::string&)>;

  explicit LineProxy(std::uint16_t upstream_port, Transform transform = {});
  ~LineProxy();

  std::uint16_t port() const;
  void set_transform(Transform transform);
  std::vector<std::pair<Direction, std::string>> captured() const;

  /// Closes every proxied connection (both sides); new ones are accepted.
  void drop_connections();

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pqe::testing
