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

#include "tfdiff/nn/hdt.hpp"

#include <cmath>

#include "../json_util.hpp"
#include "tfdiff/error.hpp"

namespace tfd::nn {

void HdtConfig::validate() const {
  if (spatial < 1 || length < 1) throw InvalidArgument("model: spatial and length must be >= 1");
  if (dim < 1 || heads < 1 || dim % heads != 0) throw InvalidArgument("model: dim must be a positive multiple of heads");
  if (spatial_blocks < 0 || deblur_blocks < 0) throw InvalidArgument("model: negative block count");
  if (ff_mult < 1) throw InvalidArgument("model: ff_mult must be >= 1");
  if (step_sinusoid_dim < 2 || step_sinusoid_dim % 2 != 0) {
    throw InvalidArgument("model: step_sinusoid_dim must be even and >= 2");
  }
  if (step_dim < 1) throw InvalidArgument("model: step_dim must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("model: dropout must be in [0, 1)");
  for (const auto& f : conditions) {
    if (f.values.empty()) throw InvalidArgument("model: condition field '" + f.name + "' has no values");
  }
}

std::string hdt_config_to_json(const HdtConfig& c) {
  json fields = json::array();
  for (const auto& f : c.conditions) fields.push_back({{"name", f.name}, {"values", f.values}});
  return json{{"spatial", c.spatial},
              {"length", c.length},
              {"dim", c.dim},
              {"heads", c.heads},
              {"spatial_blocks", c.spatial_blocks},
              {"deblur_blocks", c.deblur_blocks},
              {"ff_mult", c.ff_mult},
              {"step_sinusoid_dim", c.step_sinusoid_dim},
              {"step_dim", c.step_dim},
              {"dropout", c.dropout},
              {"conditions", fields}}
      .dump(2);
}

HdtConfig hdt_config_from_json(const std::string& text) {
  const auto j = parse_json(text, "model config");
  HdtConfig c;
  try {
    read_opt(j, "spatial", c.spatial);
    read_opt(j, "length", c.length);
    read_opt(j, "dim", c.dim);
    read_opt(j, "heads", c.heads);
    read_opt(j, "spatial_blocks", c.spatial_blocks);
    read_opt(j, "deblur_blocks", c.deblur_blocks);
    read_opt(j, "ff_mult", c.ff_mult);
    read_opt(j, "step_sinusoid_dim", c.step_sinusoid_dim);
    read_opt(j, "step_dim", c.step_dim);
    read_opt(j, "dropout", c.dropout);
    if (j.contains("conditions")) {
      for (const auto& f : j.at("conditions")) {
        c.conditions.push_back({f.at("name").get<std::string>(), f.at("values").get<std::vector<std::string>>()});
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

CMatrix step_sinusoid(int t, int dim) {
  const int half = dim / 2;
  CMatrix e(1, dim);
  for (int i = 0; i < half; ++i) {
    const double w = std::pow(10000.0, -static_cast<double>(i) / half);
    e(0, i) = std::sin(t * w);
    e(0, half + i) = std::cos(t * w);
  }
  return e;
}

HdtModel::HdtModel(HdtConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const auto& c = config_;
  const int head_dim = c.dim / c.heads;
  const Eigen::Index ff_hidden = static_cast<Eigen::Index>(c.ff_mult) * c.dim;

  step_in_ = LinearLayer::create(params_, "step.in", c.step_sinusoid_dim, c.step_dim, rng, Init::kXavier,
                                 Init::kZero, true);
  step_out_ = LinearLayer::create(params_, "step.out", c.step_dim, c.step_dim, rng, Init::kXavier,
                                  Init::kZero, true);
  for (const auto& f : c.conditions) {
    condition_tables_.push_back(params_.add(
        "condition." + f.name, init_matrix(static_cast<Eigen::Index>(f.values.size()), c.dim, Init::kXavier, rng)));
  }
  if (c.conditions.empty()) {
    null_condition_ = params_.add("condition.null", init_matrix(1, c.dim, Init::kXavier, rng));
  }

  // Nonzero input biases keep token magnitude visible after normalization.
  spatial_in_ = LinearLayer::create(params_, "spatial.in", 1, c.dim, rng, Init::kXavier, Init::kXavier);
  for (int b = 0; b < c.spatial_blocks; ++b) {
    spatial_blocks_.push_back(AdbBlock::create(params_, "spatial.block" + std::to_string(b), c.dim, c.heads,
                                               ff_hidden, c.step_dim, rng));
  }
  spatial_out_ = LinearLayer::create(params_, "spatial.out", c.dim, 1, rng, Init::kZero, Init::kZero);

  deblur_in_ = LinearLayer::create(params_, "deblur.in", c.spatial, c.dim, rng, Init::kXavier, Init::kXavier);
  for (int b = 0; b < c.deblur_blocks; ++b) {
    deblur_blocks_.push_back(AdbBlock::create(params_, "deblur.block" + std::to_string(b), c.dim, c.heads,
                                              ff_hidden, c.step_dim, rng));
  }
  deblur_out_ = LinearLayer::create(params_, "deblur.out", c.dim, c.spatial, rng, Init::kZero, Init::kZero);

  spatial_pme_ = pme_table(static_cast<Eigen::Index>(c.spatial) * c.length, c.dim, head_dim, c.spatial);
  deblur_pme_ = pme_table(c.length, c.dim, head_dim, c.length);
}

std::vector<int> HdtModel::encode(const ConditionLabel& label) const {
  return encode_condition(config_.conditions, label);
}

Var HdtModel::step_embedding(Graph& g, int t) const {
  const Var s = g.constant(step_sinusoid(t, config_.step_sinusoid_dim));
  return step_out_(g, split_activation(step_in_(g, s)));
}

Var HdtModel::condition_tokens(Graph& g, const std::vector<int>& condition) const {
  if (condition.size() != condition_tables_.size()) {
    throw InvalidArgument("model: expected " + std::to_string(condition_tables_.size()) + " condition fields, got " +
                          std::to_string(condition.size()));
  }
  if (condition_tables_.empty()) return g.param(null_condition_);
  std::vector<Var> rows;
  for (std::size_t f = 0; f < condition.size(); ++f) {
    rows.push_back(gather_rows(g.param(condition_tables_[f]), {condition[f]}));
  }
  return rows.size() == 1 ? rows.front() : concat_rows(rows);
}

Var HdtModel::forward(Graph& g, const CMatrix& x_t, const std::vector<int>& condition, int t,
                      HdtTrace* trace) const {
  const auto& c = config_;
  if (x_t.rows() != c.spatial || x_t.cols() != c.length) {
    throw InvalidArgument("model: input is " + std::to_string(x_t.rows()) + "x" + std::to_string(x_t.cols()) +
                          ", model expects " + std::to_string(c.spatial) + "x" + std::to_string(c.length));
  }
  const double p = c.dropout;
  const Var emb = step_embedding(g, t);
  const Var cond = condition_tokens(g, condition);

  // Stage 1: token r = n*M + m holds x_t(m, n); groups of M rows are samples.
  const Var x = g.constant(x_t);
  const Var tokens = reshape(x, static_cast<Eigen::Index>(c.spatial) * c.length, 1);
  Var h = spatial_in_(g, tokens);
  for (const auto& blk : spatial_blocks_) h = blk(g, h, cond, emb, c.spatial, spatial_pme_, p);
  const Var mu_hat = reshape(add(tokens, spatial_out_(g, h)), c.spatial, c.length);
  if (trace) trace->stage1 = mu_hat;

  // Stage 2: the N columns of mu_hat as one sequence.
  const Var seq = transpose(mu_hat);
  Var h2 = deblur_in_(g, seq);
  for (const auto& blk : deblur_blocks_) h2 = blk(g, h2, cond, emb, c.length, deblur_pme_, p);
  return transpose(add(seq, deblur_out_(g, h2)));
}

CMatrix HdtModel::predict(const CMatrix& x_t, const std::vector<int>& condition, int t) const {
  Graph g(&params_, GraphOptions{.record_gradients = false, .training = false});
  return forward(g, x_t, condition, t).value();
}

void HdtModel::randomize(Rng& rng, double scale) {
  for (auto& p : params_) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const double re = rng.uniform(-scale, scale);
      const double im = p.real_only ? 0.0 : rng.uniform(-scale, scale);
      p.value(i) = {re, im};
    }
  }
}

}  // namespace tfd::nn
