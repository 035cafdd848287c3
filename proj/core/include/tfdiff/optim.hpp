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

#include <vector>

#include "tfdiff/nn/graph.hpp"
#include "tfdiff/signal.hpp"

namespace tfd {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// Decoupled-weight-decay Adam over the real coordinates of every parameter.
/// First moments are stored as complex matrices (re and im moments side by
/// side); second moments store E[g_re^2] + i E[g_im^2].
class AdamW {
 public:
  AdamW(const nn::ParameterSet& params, AdamWConfig config = {});

  void step(nn::ParameterSet& params, const nn::Gradients& grads, double lr);

  const AdamWConfig& config() const { return config_; }
  long long steps() const { return steps_; }
  void set_steps(long long s) { steps_ = s; }
  std::vector<CMatrix>& first_moment() { return m_; }
  std::vector<CMatrix>& second_moment() { return v_; }
  const std::vector<CMatrix>& first_moment() const { return m_; }
  const std::vector<CMatrix>& second_moment() const { return v_; }

 private:
  AdamWConfig config_;
  long long steps_ = 0;
  std::vector<CMatrix> m_, v_;
};

/// Shadow weights: shadow <- decay * shadow + (1 - decay) * weights.
class Ema {
 public:
  Ema(const nn::ParameterSet& params, double decay);

  void update(const nn::ParameterSet& params);
  void copy_to(nn::ParameterSet& params) const;

  double decay() const { return decay_; }
  std::vector<CMatrix>& shadow() { return shadow_; }
  const std::vector<CMatrix>& shadow() const { return shadow_; }

 private:
  double decay_;
  std::vector<CMatrix> shadow_;
};

/// lr0 * factor^floor(step / interval).
double step_decay_lr(double lr0, double factor, long long interval, long long step);

/// Euclidean norm over all real gradient coordinates.
double global_norm(const nn::Gradients& grads);
/// Rescales grads so their global norm is at most max_norm; returns the
/// norm before clipping.
double clip_global_norm(nn::Gradients& grads, double max_norm);

}  // namespace tfd
