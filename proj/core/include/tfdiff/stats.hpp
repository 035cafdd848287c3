// Copyright 2026 The tfdiff Authors. All Rights Reserved.
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

namespace tfd {

struct TTest {
  double mean_difference = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
  std::size_t n = 0;
};

/// Paired test of H1: mean(a - b) > 0.
TTest paired_t_test_greater(const std::vector<double>& a, const std::vector<double>& b);

/// Welch two-sample test of H1: mean(a) != mean(b).
TTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& x);
/// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(const std::vector<double>& x);

}  // namespace tfd
