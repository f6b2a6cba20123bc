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
#include <vector>

namespace pqe::bench {

struct Summary {
  double median_ms = 0;
  double p95_ms = 0;
  double mean_ms = 0;
  double min_ms = 0;
  double max_ms = 0;
  std::size_t trials = 0;
};

/// Linear-interpolated percentile, q in [0, 1]. Empty input yields 0.
double percentile(std::vector<double> samples, double q);

Summary summarize(const std::vector<double>& samples_ms);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Ordinary least squares y = slope * x + intercept. Needs at least two
/// distinct x values; otherwise r_squared is 0.
LinearFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace pqe::bench
