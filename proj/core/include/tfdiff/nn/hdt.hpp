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
#include <string>
#include <vector>

#include "tfdiff/condition.hpp"
#include "tfdiff/nn/layers.hpp"

namespace tfd::nn {

/// Topology of the hierarchical diffusion transformer. Defaults are the
/// desk-scale toy size.
struct HdtConfig {
  int spatial = 8;  // M
  int length = 64;  // N
  int dim = 32;
  int heads = 2;
  int spatial_blocks = 2;
  int deblur_blocks = 2;
  int ff_mult = 2;
  int step_sinusoid_dim = 128;
  int step_dim = 64;
  double dropout = 0.1;
  std::vector<ConditionField> conditions;

  void validate() const;
};

std::string hdt_config_to_json(const HdtConfig& cfg);
HdtConfig hdt_config_from_json(const std::string& text);

/// Sinusoidal embedding of an integer step: [sin(t w_i), cos(t w_i)],
/// w_i = 10000^(-i / (dim/2)).
CMatrix step_sinusoid(int t, int dim);

struct HdtTrace {
  Var stage1;  // mu_hat, M x N
};

/// Two-stage complex transformer predicting the posterior mean.
///
/// Stage 1 (spatial denoise) treats each temporal column x_t^(n) as a
/// sequence of M scalar tokens and processes all N columns independently
/// with shared weights. Stage 2 (time-frequency deblur) takes the N columns
/// of the stage-1 output as one sequence of N tokens with M features each.
/// Each stage adds its zero-initialized output projection to its input, so
/// a fresh model is the identity map.
class HdtModel {
 public:
  HdtModel(HdtConfig config, std::uint64_t seed);

  const HdtConfig& config() const { return config_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  /// Real coordinates across all parameters.
  std::size_t parameter_count() const { return params_.scalar_count(); }

  std::vector<int> encode(const ConditionLabel& label) const;

  Var forward(Graph& g, const CMatrix& x_t, const std::vector<int>& condition, int t,
              HdtTrace* trace = nullptr) const;
  /// Inference-mode forward (no dropout, no gradient recording).
  CMatrix predict(const CMatrix& x_t, const std::vector<int>& condition, int t) const;

  Var step_embedding(Graph& g, int t) const;
  Var condition_tokens(Graph& g, const std::vector<int>& condition) const;

  const std::vector<AdbBlock>& spatial_blocks() const { return spatial_blocks_; }
  const std::vector<AdbBlock>& deblur_blocks() const { return deblur_blocks_; }

  /// Overwrites every parameter (including zero-initialized ones) with
  /// uniform values in +-scale. Used to exercise all gradient paths.
  void randomize(Rng& rng, double scale);

 private:
  HdtConfig config_;
  ParameterSet params_;
  LinearLayer step_in_, step_out_;
  std::vector<std::size_t> condition_tables_;
  std::size_t null_condition_ = 0;
  LinearLayer spatial_in_, spatial_out_;
  LinearLayer deblur_in_, deblur_out_;
  std::vector<AdbBlock> spatial_blocks_;
  std::vector<AdbBlock> deblur_blocks_;
  CMatrix spatial_pme_;
  CMatrix deblur_pme_;
};

}  // namespace tfd::nn
