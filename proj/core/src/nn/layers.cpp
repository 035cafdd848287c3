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

#include "tfdiff/nn/layers.hpp"

#include <cmath>

namespace tfd::nn {

CMatrix init_matrix(Eigen::Index rows, Eigen::Index cols, Init init, Rng& rng, bool real_only) {
  switch (init) {
    case Init::kZero:
      return CMatrix::Zero(rows, cols);
    case Init::kOne:
      return CMatrix::Constant(rows, cols, cplx(1.0, 0.0));
    case Init::kXavier:
      break;
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = rng.uniform(-bound, bound);
      const double im = real_only ? 0.0 : rng.uniform(-bound, bound);
      m(i, j) = {re, im};
    }
  }
  return m;
}

LinearLayer LinearLayer::create(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out,
                                Rng& rng, Init weight_init, Init bias_init, bool real_only) {
  LinearLayer l;
  l.weight = ps.add(name + ".weight", init_matrix(in, out, weight_init, rng, real_only), real_only);
  l.bias = ps.add(name + ".bias", init_matrix(1, out, bias_init, rng, real_only), real_only);
  return l;
}

AdaLayerNorm AdaLayerNorm::create(ParameterSet& ps, const std::string& name, Eigen::Index emb_dim,
                                  Eigen::Index dim, Rng& rng) {
  return {LinearLayer::create(ps, name + ".scale", emb_dim, dim, rng, Init::kZero, Init::kOne),
          LinearLayer::create(ps, name + ".shift", emb_dim, dim, rng, Init::kZero, Init::kZero)};
}

Var AdaLayerNorm::operator()(Graph& g, Var x, Var step_emb) const {
  return add_row(mul_row(normalize_tokens(x), scale(g, step_emb)), shift(g, step_emb));
}

AttentionLayer AttentionLayer::create(ParameterSet& ps, const std::string& name, Eigen::Index dim,
                                      Eigen::Index kv_dim, int heads, Rng& rng) {
  AttentionLayer a;
  a.query = LinearLayer::create(ps, name + ".query", dim, dim, rng);
  a.key = LinearLayer::create(ps, name + ".key", kv_dim, dim, rng);
  a.value = LinearLayer::create(ps, name + ".value", kv_dim, dim, rng);
  a.out = LinearLayer::create(ps, name + ".out", dim, dim, rng, Init::kZero, Init::kZero);
  a.heads = heads;
  return a;
}

Var AttentionLayer::self(Graph& g, Var x, int group, const CMatrix& pme, double dropout) const {
  const Var q = mul_const(query(g, x), pme);
  const Var k = mul_const(key(g, x), pme);
  const Var v = value(g, x);
  return out(g, complex_attention(q, k, v, {heads, group, group}, dropout));
}

Var AttentionLayer::cross(Graph& g, Var x, Var cond, int group, double dropout) const {
  const Var q = query(g, x);
  const Var k = key(g, cond);
  const Var v = value(g, cond);
  return out(g, complex_attention(q, k, v, {heads, group, 0}, dropout));
}

FeedForward FeedForward::create(ParameterSet& ps, const std::string& name, Eigen::Index dim,
                                Eigen::Index hidden, Rng& rng) {
  return {LinearLayer::create(ps, name + ".in", dim, hidden, rng),
          LinearLayer::create(ps, name + ".out", hidden, dim, rng, Init::kZero, Init::kZero)};
}

Var FeedForward::operator()(Graph& g, Var x, double dropout) const {
  return out(g, nn::dropout(split_activation(in(g, x)), dropout));
}

AdbBlock AdbBlock::create(ParameterSet& ps, const std::string& name, Eigen::Index dim, int heads,
                          Eigen::Index ff_hidden, Eigen::Index emb_dim, Rng& rng) {
  AdbBlock b;
  b.norm_self = AdaLayerNorm::create(ps, name + ".norm_self", emb_dim, dim, rng);
  b.self_attn = AttentionLayer::create(ps, name + ".self_attn", dim, dim, heads, rng);
  b.norm_cross = AdaLayerNorm::create(ps, name + ".norm_cross", emb_dim, dim, rng);
  b.cross_attn = AttentionLayer::create(ps, name + ".cross_attn", dim, dim, heads, rng);
  b.norm_ff = AdaLayerNorm::create(ps, name + ".norm_ff", emb_dim, dim, rng);
  b.ff = FeedForward::create(ps, name + ".ff", dim, ff_hidden, rng);
  return b;
}

Var AdbBlock::operator()(Graph& g, Var x, Var cond, Var step_emb, int group, const CMatrix& pme,
                         double dropout, AdbTrace* trace) const {
  x = add(x, self_attn.self(g, norm_self(g, x, step_emb), group, pme, dropout));
  if (trace) trace->after_self = x;
  x = add(x, cross_attn.cross(g, norm_cross(g, x, step_emb), cond, group, dropout));
  if (trace) trace->after_cross = x;
  return add(x, ff(g, norm_ff(g, x, step_emb), dropout));
}

}  // namespace tfd::nn
