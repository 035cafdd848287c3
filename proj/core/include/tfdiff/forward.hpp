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

#include <cstdint>

#include "tfdiff/rng.hpp"
#include "tfdiff/schedule.hpp"
#include "tfdiff/signal.hpp"

namespace tfd {

/// i.i.d. CN(0, 1) entries (E|eps|^2 = 1) and the seed that produced them.
struct NoiseDraw {
  CMatrix eps;
  std::uint64_t seed = 0;

  static NoiseDraw zeros(Eigen::Index spatial, Eigen::Index temporal) {
    return {CMatrix::Zero(spatial, temporal), 0};
  }
};

NoiseDraw draw_noise(Eigen::Index spatial, Eigen::Index temporal, std::uint64_t seed);
CMatrix draw_noise(Eigen::Index spatial, Eigen::Index temporal, Rng& rng);

/// One corruption step in the time domain: gamma_t * x_prev + beta_t * eps,
/// with gamma_t broadcast over the spatial rows.
ComplexSequence destruct_step(const ComplexSequence& x_prev, int t, const DiffusionSchedule& sched,
                              const NoiseDraw& noise);

/// The same step computed through the spectrum: DFT, cyclic convolution with
/// the frequency kernel G_t, inverse DFT, then sqrt(alpha_t) and noise.
ComplexSequence destruct_step_spectral(const ComplexSequence& x_prev, int t,
                                       const DiffusionSchedule& sched, const NoiseDraw& noise);

/// Frequency kernel matching g_t under the unitary DFT: dft(g_t) / sqrt(N),
/// so that idft(G (*) dft(x)) == g_t * x.
std::vector<cplx> frequency_kernel(const DiffusionSchedule& sched, int t);

/// Closed-form jump x_t = gamma_bar_t * x0 + sigma_bar_t * eps.
ComplexSequence destruct_to(const ComplexSequence& x0, int t, const DiffusionSchedule& sched,
                            const NoiseDraw& noise);

/// sigma_bar_T * eps; the starting point of the sampler.
ComplexSequence terminal_sample(const DiffusionSchedule& sched, const NoiseDraw& noise);

/// Multiplies each temporal column n of x by w[n].
CMatrix scale_columns(const CMatrix& x, const RVector& w);

}  // namespace tfd
