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

namespace tfd::nn {

// Differentiable complex operations. Matrices are token-major: one token per
// row, features along columns.

Var add(Var a, Var b);
Var scale(Var a, double s);
Var matmul(Var a, Var b);

/// x W + b, with x: R x I, W: I x O, b: 1 x O broadcast over rows.
Var linear(Var x, Var w, Var b);
Var linear(Var x, Var w);

/// Broadcast a 1 x C row over every row of x.
Var add_row(Var x, Var row);
Var mul_row(Var x, Var row);

/// Elementwise product with a constant matrix of the same shape.
Var mul_const(Var x, const CMatrix& c);

enum class Activation { kGelu, kSilu };

/// g(re) + i g(im).
Var split_activation(Var x, Activation kind = Activation::kGelu);

/// Zeroes whole complex entries with probability p (re and im share the
/// mask) and rescales survivors by 1/(1-p). Identity unless training.
Var dropout(Var x, double p);

/// Per-token normalization: subtract the complex feature mean, divide by the
/// RMS over the 2d real coordinates (with eps added to the variance).
Var normalize_tokens(Var x, double eps = 1e-5);

struct AttentionLayout {
  int heads = 1;
  /// Consecutive query rows forming one independent sequence.
  int query_group = 0;
  /// Consecutive key rows per sequence; 0 means every query group attends to
  /// all key rows (used for cross-attention against shared condition tokens).
  int key_group = 0;
};

/// Complex multi-head attention. For query i and key j of one head,
/// s_ij = q_i^H k_j / sqrt(d_head) and the weight is
/// softmax_j(|s_ij|) * exp(i arg s_ij). Dropout p applies to the weights.
Var complex_attention(Var q, Var k, Var v, const AttentionLayout& layout, double dropout_p = 0.0);

/// Scaled Hermitian scores q_i^H k_j / sqrt(d) of a single head and sequence.
CMatrix attention_scores(const CMatrix& q, const CMatrix& k);
/// Attention weights of a single head and sequence, without recording.
CMatrix attention_weights(const CMatrix& q, const CMatrix& k);

/// Column-major reinterpretation as rows x cols.
Var reshape(Var x, Eigen::Index rows, Eigen::Index cols);
/// Plain (non-conjugating) transpose.
Var transpose(Var x);

Var gather_rows(Var table, const std::vector<int>& rows);
Var concat_rows(const std::vector<Var>& parts);

/// mean |pred - target|^2 as a 1x1 real value.
Var mse(Var pred, const CMatrix& target);
/// Re sum conj(w) x as a 1x1 value; a generic linear probe for tests.
Var inner(Var x, const CMatrix& w);

/// Phase modulation encoding of one token: x_i exp(i n theta_i) with
/// theta_i = 10000^(-i / d), d = x.size().
Eigen::VectorXcd pme_encode(const Eigen::VectorXcd& x, double position);

/// Unit-modulus phase table for phase modulation encoding. Row r gets
/// position r % group; column c is feature i = c % head_dim of its head,
/// rotated by position * 10000^(-i / head_dim).
CMatrix pme_table(Eigen::Index rows, Eigen::Index dim, int head_dim, int group);

}  // namespace tfd::nn
