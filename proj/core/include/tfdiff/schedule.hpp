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

#include <string>
#include <utility>
#include <vector>

#include "tfdiff/signal.hpp"

namespace tfd {

/// Noise and blur schedule endpoints. Both ramps are linear over t = 1..T,
/// inclusive of both endpoints; with the defaults beta_t = 1e-4 t and
/// s_t = 1e-3 t.
struct ScheduleConfig {
  int steps = 300;
  double beta_start = 1e-4;
  double beta_end = 0.03;
  double blur_start = 1e-3;
  double blur_end = 0.3;
  int length = 64;
  /// false gives Gaussian-only diffusion (g_t == 1).
  bool blur_enabled = true;

  /// Throws InvalidArgument on malformed ranges. Zero noise or zero blur is
  /// accepted here and rejected by the gamma < 1 check in build_schedule.
  void validate() const;
};

/// Per-step coefficients, indexed directly by t in [0, T].
///
/// Index 0 holds the identity step: gamma_bar[0] = 1, sigma_bar[0] = 0,
/// alpha[0] = 1, beta[0] = 0. Vectors are length N (temporal).
struct DiffusionSchedule {
  ScheduleConfig config;
  std::vector<double> alpha;       // 1 - beta^2
  std::vector<double> beta;        // noise std, also sigma_t
  std::vector<double> blur_std;    // frequency-domain kernel std s_t, in bins
  std::vector<RVector> g;          // time-domain blur window
  std::vector<RVector> gamma;      // sqrt(alpha) * g
  std::vector<RVector> gamma_bar;  // running product of gamma
  std::vector<RVector> sigma_bar;  // sigma_bar_t^2 = gamma_t^2 sigma_bar_{t-1}^2 + beta_t^2

  int steps() const { return static_cast<int>(alpha.size()) - 1; }
  int length() const { return static_cast<int>(gamma_bar.front().size()); }
  double sigma(int t) const { return beta.at(t); }
};

/// Time-domain dual of a unit-DC Gaussian frequency kernel of std `blur_std`
/// bins: exp(-1/2 (2 pi s d(n) / N)^2), d(n) = min(n, N - n).
RVector blur_window(double blur_std, int length);

/// Builds every coefficient. Throws ConvergenceViolation listing each (t, n)
/// with gamma[t][n] >= 1.
DiffusionSchedule build_schedule(const ScheduleConfig& cfg);

/// Derives alpha, gamma, gamma_bar and sigma_bar from per-step beta and g
/// (vectors indexed 0..T, entry 0 ignored). Does not check gamma < 1.
DiffusionSchedule assemble_schedule(const ScheduleConfig& cfg, std::vector<double> beta,
                                    std::vector<double> blur_std, std::vector<RVector> g);

struct ConvergenceReport {
  bool passed = false;
  std::vector<std::pair<int, int>> gamma_violations;  // gamma[t][n] >= 1
  std::vector<int> bound_violations;                  // n where sigma_bar[T] exceeds the bound
  std::vector<std::pair<int, int>> monotonic_violations;  // gamma_bar[t][n] > gamma_bar[t-1][n]
  double alpha_min = 0.0;
  RVector gamma_max;         // max_t gamma[t][n]
  RVector sigma_bar_bound;   // sqrt(1 - alpha_min) / (1 - gamma_max)
  double min_bound_margin = 0.0;  // min_n (bound - sigma_bar[T])
  double max_gamma_bar_final = 0.0;
  double max_recursion_error = 0.0;
};

/// Checks gamma < 1, the sigma_bar[T] bound, monotone gamma_bar and the
/// variance recursion; reports the residual signal weight max gamma_bar[T].
ConvergenceReport verify_convergence(const DiffusionSchedule& sched);

std::string schedule_to_json(const DiffusionSchedule& sched);
DiffusionSchedule schedule_from_json(const std::string& text);

/// ScheduleConfig <-> JSON object text. Missing keys keep their defaults.
std::string schedule_config_to_json(const ScheduleConfig& cfg);
ScheduleConfig schedule_config_from_json(const std::string& text);

}  // namespace tfd
