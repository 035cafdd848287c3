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

#include "tfdiff/forward.hpp"

#include <cmath>
#include <string>

#include "tfdiff/error.hpp"

namespace tfd {
namespace {

void check_step(const ComplexSequence& x, int t, const DiffusionSchedule& sched,
                const NoiseDraw& noise, const char* op) {
  if (t < 1 || t > sched.steps()) {
    throw InvalidArgument(std::string(op) + ": step " + std::to_string(t) + " outside [1, " +
                          std::to_string(sched.steps()) + "]");
  }
  if (x.temporal() != sched.length()) {
    throw InvalidArgument(std::string(op) + ": sequence length " + std::to_string(x.temporal()) +
                          " does not match schedule length " + std::to_string(sched.length()));
  }
  if (noise.eps.rows() != x.spatial() || noise.eps.cols() != x.temporal()) {
    throw InvalidArgument(std::string(op) + ": noise shape mismatch");
  }
}

}  // namespace

NoiseDraw draw_noise(Eigen::Index spatial, Eigen::Index temporal, std::uint64_t seed) {
  Rng rng(seed);
  return {draw_noise(spatial, temporal, rng), seed};
}

CMatrix draw_noise(Eigen::Index spatial, Eigen::Index temporal, Rng& rng) {
  CMatrix eps(spatial, temporal);
  // Row-major fill so the stream order matches the on-disk layout.
  for (Eigen::Index m = 0; m < spatial; ++m) {
    for (Eigen::Index n = 0; n < temporal; ++n) eps(m, n) = rng.complex_normal();
  }
  return eps;
}

CMatrix scale_columns(const CMatrix& x, const RVector& w) {
  return x * w.cast<cplx>().asDiagonal();
}

ComplexSequence destruct_step(const ComplexSequence& x_prev, int t, const DiffusionSchedule& sched,
                              const NoiseDraw& noise) {
  check_step(x_prev, t, sched, noise, "destruct_step");
  return ComplexSequence(scale_columns(x_prev.values, sched.gamma[t]) + sched.beta[t] * noise.eps);
}

std::vector<cplx> frequency_kernel(const DiffusionSchedule& sched, int t) {
  const auto& g = sched.g.at(t);
  std::vector<cplx> gc(g.begin(), g.end());
  auto kernel = dft(gc);
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
  for (auto& v : kernel) v *= scale;
  return kernel;
}

ComplexSequence destruct_step_spectral(const ComplexSequence& x_prev, int t,
                                       const DiffusionSchedule& sched, const NoiseDraw& noise) {
  check_step(x_prev, t, sched, noise, "destruct_step_spectral");
  const auto kernel = frequency_kernel(sched, t);
  const auto spectrum = dft(x_prev);
  const auto n = x_prev.temporal();
  CMatrix blurred(x_prev.spatial(), n);
  for (Eigen::Index m = 0; m < x_prev.spatial(); ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      cplx acc{};
      for (Eigen::Index j = 0; j < n; ++j) acc += kernel[j] * spectrum.values(m, (k - j + n) % n);
      blurred(m, k) = acc;
    }
  }
  const auto time = idft(Spectrum{std::move(blurred)});
  return ComplexSequence(std::sqrt(sched.alpha[t]) * time.values + sched.beta[t] * noise.eps);
}

ComplexSequence destruct_to(const ComplexSequence& x0, int t, const DiffusionSchedule& sched,
                            const NoiseDraw& noise) {
  check_step(x0, t, sched, noise, "destruct_to");
  return ComplexSequence(scale_columns(x0.values, sched.gamma_bar[t]) +
                         scale_columns(noise.eps, sched.sigma_bar[t]));
}

ComplexSequence terminal_sample(const DiffusionSchedule& sched, const NoiseDraw& noise) {
  if (noise.eps.cols() != sched.length()) throw InvalidArgument("terminal_sample: noise length mismatch");
  return ComplexSequence(scale_columns(noise.eps, sched.sigma_bar[sched.steps()]));
}

}  // namespace tfd
