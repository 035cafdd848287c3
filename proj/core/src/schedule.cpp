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

#include "tfdiff/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json_util.hpp"
#include "tfdiff/error.hpp"

namespace tfd {

void to_json(json& j, const ScheduleConfig& c) {
  j = json{{"steps", c.steps},           {"beta_start", c.beta_start},
           {"beta_end", c.beta_end},     {"blur_start", c.blur_start},
           {"blur_end", c.blur_end},     {"length", c.length},
           {"blur_enabled", c.blur_enabled}};
}

void from_json(const json& j, ScheduleConfig& c) {
  read_opt(j, "steps", c.steps);
  read_opt(j, "beta_start", c.beta_start);
  read_opt(j, "beta_end", c.beta_end);
  read_opt(j, "blur_start", c.blur_start);
  read_opt(j, "blur_end", c.blur_end);
  read_opt(j, "length", c.length);
  read_opt(j, "blur_enabled", c.blur_enabled);
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string(what) + ": " + e.what());
  }
}

void ScheduleConfig::validate() const {
  if (steps < 1) throw InvalidArgument("schedule: steps must be >= 1");
  if (length < 1) throw InvalidArgument("schedule: length must be >= 1");
  // Endpoint ordering is not enforced: degenerate ramps must reach the
  // coefficient checks so they are reported per (t, n).
  if (!(beta_start >= 0.0 && beta_start < 1.0 && beta_end >= 0.0 && beta_end < 1.0)) {
    throw InvalidArgument("schedule: beta endpoints must lie in [0, 1)");
  }
  if (blur_enabled && !(blur_start >= 0.0 && std::isfinite(blur_start) && blur_end >= 0.0 && std::isfinite(blur_end))) {
    throw InvalidArgument("schedule: blur endpoints must be finite and >= 0");
  }
}

namespace {

double ramp(double start, double end, int t, int steps) {
  if (steps == 1) return end;
  return start + (end - start) * static_cast<double>(t - 1) / static_cast<double>(steps - 1);
}

}  // namespace

RVector blur_window(double blur_std, int length) {
  RVector g(length);
  for (int n = 0; n < length; ++n) {
    const double d = std::min(n, length - n);
    const double z = 2.0 * std::numbers::pi * blur_std * d / length;
    g[n] = std::exp(-0.5 * z * z);
  }
  return g;
}

DiffusionSchedule assemble_schedule(const ScheduleConfig& cfg, std::vector<double> beta,
                                    std::vector<double> blur_std, std::vector<RVector> g) {
  const int steps = static_cast<int>(beta.size()) - 1;
  if (steps < 1 || g.size() != beta.size() || blur_std.size() != beta.size()) {
    throw InvalidArgument("schedule: inconsistent step count");
  }
  const auto n = g[1].size();
  DiffusionSchedule s;
  s.config = cfg;
  s.config.steps = steps;
  s.config.length = static_cast<int>(n);
  s.beta = std::move(beta);
  s.blur_std = std::move(blur_std);
  s.g = std::move(g);
  s.beta[0] = 0.0;
  s.blur_std[0] = 0.0;
  s.g[0] = RVector::Ones(n);
  s.alpha.resize(steps + 1);
  s.gamma.resize(steps + 1);
  s.gamma_bar.resize(steps + 1);
  s.sigma_bar.resize(steps + 1);
  s.alpha[0] = 1.0;
  s.gamma[0] = RVector::Ones(n);
  s.gamma_bar[0] = RVector::Ones(n);
  s.sigma_bar[0] = RVector::Zero(n);
  for (int t = 1; t <= steps; ++t) {
    if (s.g[t].size() != n) throw InvalidArgument("schedule: blur window length mismatch");
    s.alpha[t] = 1.0 - s.beta[t] * s.beta[t];
    s.gamma[t] = std::sqrt(s.alpha[t]) * s.g[t];
    s.gamma_bar[t] = s.gamma[t].cwiseProduct(s.gamma_bar[t - 1]);
    const RVector var = s.gamma[t].cwiseAbs2().cwiseProduct(s.sigma_bar[t - 1].cwiseAbs2()).array() +
                        s.beta[t] * s.beta[t];
    s.sigma_bar[t] = var.cwiseSqrt();
  }
  return s;
}

DiffusionSchedule build_schedule(const ScheduleConfig& cfg) {
  cfg.validate();
  const int steps = cfg.steps;
  std::vector<double> beta(steps + 1, 0.0);
  std::vector<double> blur(steps + 1, 0.0);
  std::vector<RVector> g(steps + 1, RVector::Ones(cfg.length));
  for (int t = 1; t <= steps; ++t) {
    beta[t] = ramp(cfg.beta_start, cfg.beta_end, t, steps);
    if (cfg.blur_enabled) {
      blur[t] = ramp(cfg.blur_start, cfg.blur_end, t, steps);
      g[t] = blur_window(blur[t], cfg.length);
    }
  }
  auto s = assemble_schedule(cfg, std::move(beta), std::move(blur), std::move(g));

  std::vector<std::pair<int, int>> bad;
  for (int t = 1; t <= steps; ++t) {
    for (int n = 0; n < cfg.length; ++n) {
      if (!(s.gamma[t][n] < 1.0)) bad.emplace_back(t, n);
    }
  }
  if (!bad.empty()) {
    std::string msg = "schedule violates gamma[t][n] < 1 at " + std::to_string(bad.size()) +
                      " entries, first (t=" + std::to_string(bad.front().first) +
                      ", n=" + std::to_string(bad.front().second) + ")";
    throw ConvergenceViolation(msg, std::move(bad));
  }
  return s;
}

ConvergenceReport verify_convergence(const DiffusionSchedule& sched) {
  ConvergenceReport r;
  const int steps = sched.steps();
  const int n = sched.length();
  r.gamma_max = RVector::Zero(n);
  r.alpha_min = 1.0;
  for (int t = 1; t <= steps; ++t) {
    r.alpha_min = std::min(r.alpha_min, sched.alpha[t]);
    r.gamma_max = r.gamma_max.cwiseMax(sched.gamma[t]);
    for (int i = 0; i < n; ++i) {
      if (!(sched.gamma[t][i] < 1.0)) r.gamma_violations.emplace_back(t, i);
      if (sched.gamma_bar[t][i] > sched.gamma_bar[t - 1][i]) r.monotonic_violations.emplace_back(t, i);
      const double lhs = sched.sigma_bar[t][i] * sched.sigma_bar[t][i];
      const double rhs = sched.gamma[t][i] * sched.gamma[t][i] *
                             sched.sigma_bar[t - 1][i] * sched.sigma_bar[t - 1][i] +
                         sched.beta[t] * sched.beta[t];
      r.max_recursion_error = std::max(r.max_recursion_error, std::abs(lhs - rhs));
    }
  }
  const double noise_max = std::sqrt(1.0 - r.alpha_min);
  r.sigma_bar_bound.resize(n);
  r.min_bound_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double denom = 1.0 - r.gamma_max[i];
    r.sigma_bar_bound[i] = denom > 0.0 ? noise_max / denom : std::numeric_limits<double>::infinity();
    const double margin = r.sigma_bar_bound[i] - sched.sigma_bar[steps][i];
    r.min_bound_margin = std::min(r.min_bound_margin, margin);
    if (!(denom > 0.0) || margin < 0.0) r.bound_violations.push_back(i);
  }
  r.max_gamma_bar_final = sched.gamma_bar[steps].maxCoeff();
  r.passed = r.gamma_violations.empty() && r.bound_violations.empty() &&
             r.monotonic_violations.empty() && r.max_recursion_error <= 1e-12;
  return r;
}

std::string schedule_config_to_json(const ScheduleConfig& cfg) { return json(cfg).dump(2); }

ScheduleConfig schedule_config_from_json(const std::string& text) {
  const auto j = parse_json(text, "schedule config");
  ScheduleConfig c;
  try {
    from_json(j.contains("schedule") ? j.at("schedule") : j, c);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("schedule config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string schedule_to_json(const DiffusionSchedule& sched) {
  json steps = json::array();
  for (int t = 1; t <= sched.steps(); ++t) {
    steps.push_back({{"t", t},
                     {"alpha", sched.alpha[t]},
                     {"beta", sched.beta[t]},
                     {"blur_std", sched.blur_std[t]},
                     {"g", std::vector<double>(sched.g[t].begin(), sched.g[t].end())}});
  }
  return json{{"format", "tfdiff-schedule"}, {"version", 1}, {"config", sched.config}, {"steps", steps}}
      .dump();
}

DiffusionSchedule schedule_from_json(const std::string& text) {
  const auto j = parse_json(text, "schedule");
  try {
    ScheduleConfig cfg = j.at("config").get<ScheduleConfig>();
    const auto& steps = j.at("steps");
    if (steps.empty()) throw InvalidArgument("schedule: no steps");
    std::vector<double> beta(steps.size() + 1, 0.0);
    std::vector<double> blur(steps.size() + 1, 0.0);
    std::vector<RVector> g(steps.size() + 1);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto& s = steps[i];
      if (s.at("t").get<std::size_t>() != i + 1) throw InvalidArgument("schedule: steps out of order");
      beta[i + 1] = s.at("beta").get<double>();
      blur[i + 1] = s.at("blur_std").get<double>();
      const auto v = s.at("g").get<std::vector<double>>();
      g[i + 1] = Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    g[0] = RVector::Ones(g[1].size());
    return assemble_schedule(cfg, std::move(beta), std::move(blur), std::move(g));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("schedule: ") + e.what());
  }
}

}  // namespace tfd
