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

namespace pqe::envelope {

/// Sliding-window duplicate filter over 64-bit sequence numbers, one per
/// directed peer pair. Bit i of the mask records `highest - i`.
class ReplayWindow {
 public:
  static constexpr std::size_t kWidth = 64;

  /// True if `seq` is newer than anything seen, or inside the window and
  /// not yet marked.
  bool would_accept(std::uint64_t seq) const;

  /// Records `seq`. Call only after would_accept(seq) and a successful open.
  void mark(std::uint64_t seq);

  bool empty() const { return !any_; }
  std::uint64_t highest() const { return highest_; }
  std::uint64_t mask() const { return mask_; }

  /// Rebuilds a window from persisted highest() and mask().
  static ReplayWindow restore(std::uint64_t highest, std::uint64_t mask);

 private:
  bool any_ = false;
  std::uint64_t highest_ = 0;
  std::uint64_t mask_ = 0;
};

}  // namespace pqe::envelope
