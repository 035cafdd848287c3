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

#include "tfdiff/optim.hpp"

#include <cmath>

#include "tfdiff/error.hpp"

namespace tfd {

AdamW::AdamW(const nn::ParameterSet& params, AdamWConfig config) : config_(config) {
  for (const auto& p : params) {
    m_.push_back(CMatrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(CMatrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void AdamW::step(nn::ParameterSet& params, const nn::Gradients& grads, double lr) {
  if (grads.size() != params.size()) throw InvalidArgument("optimizer: gradient count mismatch");
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& w = params[i].value;
    const auto& g = grads[i];
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double gr = g(k).real(), gi = g(k).imag();
      const nn::cplx m = b1 * m_[i](k) + (1.0 - b1) * g(k);
      const nn::cplx v{b2 * v_[i](k).real() + (1.0 - b2) * gr * gr, b2 * v_[i](k).imag() + (1.0 - b2) * gi * gi};
      m_[i](k) = m;
      v_[i](k) = v;
      const double ur = (m.real() / c1) / (std::sqrt(v.real() / c2) + config_.eps);
      const double ui = (m.imag() / c1) / (std::sqrt(v.imag() / c2) + config_.eps);
      const nn::cplx decayed = w(k) * (1.0 - lr * config_.weight_decay);
      w(k) = decayed - lr * nn::cplx{ur, params[i].real_only ? 0.0 : ui};
    }
  }
}

Ema::Ema(const nn::ParameterSet& params, double decay) : decay_(decay) {
  if (!(decay >= 0.0 && decay < 1.0)) throw InvalidArgument("ema: decay must be in [0, 1)");
  for (const auto& p : params) shadow_.push_back(p.value);
}

void Ema::update(const nn::ParameterSet& params) {
  std::size_t i = 0;
  for (const auto& p : params) {
    shadow_[i] = decay_ * shadow_[i] + (1.0 - decay_) * p.value;
    ++i;
  }
}

void Ema::copy_to(nn::ParameterSet& params) const {
  std::size_t i = 0;
  for (auto& p : params) p.value = shadow_[i++];
}

double step_decay_lr(double lr0, double factor, long long interval, long long step) {
  if (interval <= 0) return lr0;
  return lr0 * std::pow(factor, static_cast<double>(step / interval));
}

double global_norm(const nn::Gradients& grads) {
  double s = 0.0;
  for (const auto& g : grads) s += g.squaredNorm();
  return std::sqrt(s);
}

double clip_global_norm(nn::Gradients& grads, double max_norm) {
  const double n = global_norm(grads);
  if (max_norm > 0.0 && n > max_norm) {
    const double k = max_norm / n;
    for (auto& g : grads) g *= k;
  }
  return n;
}

}  // namespace tfd
