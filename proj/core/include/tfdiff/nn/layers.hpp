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

#include "tfdiff/nn/graph.hpp"
#include "tfdiff/nn/ops.hpp"

namespace tfd::nn {

enum class Init {
  kXavier,  // uniform in +-sqrt(6 / (fan_in + fan_out)) per real coordinate
  kZero,
  kOne,
};

CMatrix init_matrix(Eigen::Index rows, Eigen::Index cols, Init init, Rng& rng, bool real_only = false);

struct LinearLayer {
  std::size_t weight = 0;
  std::size_t bias = 0;

  static LinearLayer create(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out,
                            Rng& rng, Init weight_init = Init::kXavier, Init bias_init = Init::kZero,
                            bool real_only = false);
  Var operator()(Graph& g, Var x) const { return linear(x, g.param(weight), g.param(bias)); }
};

/// Token normalization whose complex scale and shift are regressed from the
/// step embedding. The scale head starts at 1 + 0i and the shift head at 0.
struct AdaLayerNorm {
  LinearLayer scale;
  LinearLayer shift;

  static AdaLayerNorm create(ParameterSet& ps, const std::string& name, Eigen::Index emb_dim,
                             Eigen::Index dim, Rng& rng);
  Var operator()(Graph& g, Var x, Var step_emb) const;
};

struct AttentionLayer {
  LinearLayer query, key, value, out;
  int heads = 1;

  /// `out` is zero-initialized so the residual branch starts at zero.
  static AttentionLayer create(ParameterSet& ps, const std::string& name, Eigen::Index dim,
                               Eigen::Index kv_dim, int heads, Rng& rng);

  /// Self-attention within consecutive groups of `group` rows; queries and
  /// keys are phase-modulated by `pme` (rows x dim) after projection.
  Var self(Graph& g, Var x, int group, const CMatrix& pme, double dropout) const;
  /// Every group of x attends to all rows of `cond`.
  Var cross(Graph& g, Var x, Var cond, int group, double dropout) const;
};

struct FeedForward {
  LinearLayer in, out;

  static FeedForward create(ParameterSet& ps, const std::string& name, Eigen::Index dim,
                            Eigen::Index hidden, Rng& rng);
  Var operator()(Graph& g, Var x, double dropout) const;
};

/// Intermediate residual states of one block, for inspection in tests.
struct AdbTrace {
  Var after_self;
  Var after_cross;
};

/// Attention-based diffusion block:
///   x += SelfAttn(PME(adaLN(x)));  x += CrossAttn(adaLN(x), cond);  x += FF(adaLN(x))
struct AdbBlock {
  AdaLayerNorm norm_self, norm_cross, norm_ff;
  AttentionLayer self_attn, cross_attn;
  FeedForward ff;

  static AdbBlock create(ParameterSet& ps, const std::string& name, Eigen::Index dim, int heads,
                         Eigen::Index ff_hidden, Eigen::Index emb_dim, Rng& rng);
  Var operator()(Graph& g, Var x, Var cond, Var step_emb, int group, const CMatrix& pme, double dropout,
                 AdbTrace* trace = nullptr) const;
};

}  // namespace tfd::nn
