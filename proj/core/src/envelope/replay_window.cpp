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

#include "pqe/envelope/replay_window.hpp"

namespace pqe::envelope {

bool ReplayWindow::would_accept(std::uint64_t seq) const {
  if (!any_ || seq > highest_) return true;
  std::uint64_t age = highest_ - seq;
  if (age >= kWidth) return false;
  return ((mask_ >> age) & 1u) == 0;
}

void ReplayWindow::mark(std::uint64_t seq) {
  if (!any_) {
    any_ = true;
    highest_ = seq;
    mask_ = 1;
    return;
  }
  if (seq > highest_) {
    std::uint64_t shift = seq - highest_;
    mask_ = shift >= kWidth ? 0 : mask_ << shift;
    mask_ |= 1;
    highest_ = seq;
    return;
  }
  std::uint64_t age = highest_ - seq;
  if (age < kWidth) mask_ |= std::uint64_t{1} << age;
}

ReplayWindow ReplayWindow::restore(std::uint64_t highest, std::uint64_t mask) {
  ReplayWindow w;
  w.any_ = true;
  w.highest_ = highest;
  w.mask_ = mask | 1u;
  return w;
}

}  // namespace pqe::envelope
