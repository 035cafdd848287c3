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
#include <functional>
#include <vector>

#include "tfdiff/condition.hpp"
#include "tfdiff/nn/hdt.hpp"
#include "tfdiff/optim.hpp"
#include "tfdiff/rng.hpp"
#include "tfdiff/schedule.hpp"
#include "tfdiff/signal.hpp"

namespace tfd {

/// Gaussian posterior q(x_{t-1} | x_t, x_0).
struct PosteriorParams {
  CMatrix mu_tilde;
  RVector sigma_tilde;  // per temporal index
};

PosteriorParams posterior_params(const CMatrix& x_t, const CMatrix& x0, int t, const DiffusionSchedule& sched);

/// Mean of |pred - target|^2 over all entries.
double training_loss(const CMatrix& pred, const CMatrix& target);

/// Predicts mu_{t-1} from (x_t, t).
using MeanModel = std::function<CMatrix(const CMatrix& x_t, int t)>;

/// Runs the reverse chain from x_T = sigma_bar_T * eps down to x_0 with
/// x_{t-1} = model(x_t, t) + sigma_tilde_{t-1} * eps. No noise is added on
/// the last step.
CMatrix sample_chain(const MeanModel& model, const DiffusionSchedule& sched, Eigen::Index spatial, Rng& rng);

/// Conditional generation with an HDT.
ComplexSequence sample(const nn::HdtModel& model, const ConditionLabel& label, const DiffusionSchedule& sched,
                       Rng& rng);

struct TrainBatch {
  std::vector<CMatrix> x0;
  std::vector<std::vector<int>> condition;
};

struct TrainStepResult {
  double loss = 0.0;       // mean over the batch
  double grad_norm = 0.0;  // before clipping
  std::vector<int> steps;  // sampled t per item
};

struct TrainStepOptions {
  double lr = 1e-3;
  double clip_norm = 1.0;  // <= 0 disables clipping
};

/// One optimization step. All randomness derives from step_seed and the
/// item index, so a step is reproducible from (parameters, batch, seed).
/// Throws TrainingAborted when the loss or a gradient is non-finite.
TrainStepResult train_step(nn::HdtModel& model, const TrainBatch& batch, const DiffusionSchedule& sched,
                           std::uint64_t step_seed, AdamW& opt, Ema& ema, const TrainStepOptions& options);

/// Per-item draws used by train_step, exposed for tests and probe losses.
struct TrainingExample {
  int t = 0;
  CMatrix x_t;
  CMatrix target;
};
TrainingExample make_training_example(const CMatrix& x0, const DiffusionSchedule& sched, Rng& rng);

}  // namespace tfd
