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

#include "tfdiff/reverse.hpp"

#include <cmath>
#include <sstream>

#include "tfdiff/error.hpp"
#include "tfdiff/forward.hpp"
#include "tfdiff/parallel.hpp"

namespace tfd {

PosteriorParams posterior_params(const CMatrix& x_t, const CMatrix& x0, int t, const DiffusionSchedule& sched) {
  if (t < 1 || t > sched.steps()) {
    throw InvalidArgument("posterior: step " + std::to_string(t) + " outside [1, " + std::to_string(sched.steps()) +
                          "]");
  }
  const Eigen::Index n = sched.length();
  if (x_t.cols() != n || x0.cols() != n || x_t.rows() != x0.rows()) {
    throw InvalidArgument("posterior: shape mismatch");
  }
  const RVector& sb_prev = sched.sigma_bar[t - 1];
  const RVector& sb = sched.sigma_bar[t];
  const RVector& gam = sched.gamma[t];
  const RVector& gb_prev = sched.gamma_bar[t - 1];
  const double s2 = sched.sigma(t) * sched.sigma(t);
  if ((sb.array() <= 0.0).any()) throw InvalidArgument("posterior: degenerate schedule, sigma_bar is zero");

  // sigma_bar_t^2 from the recursion, so t = 1 gives weights of exactly 0 and 1.
  const RVector var = gam.array().square() * sb_prev.array().square() + s2;
  const RVector w_t = gam.array() * sb_prev.array().square() / var.array();
  const RVector w_0 = gb_prev.array() * s2 / var.array();
  PosteriorParams out;
  out.mu_tilde = scale_columns(x_t, w_t) + scale_columns(x0, w_0);
  out.sigma_tilde = sb_prev.array() * sched.sigma(t) / sb.array();
  return out;
}

double training_loss(const CMatrix& pred, const CMatrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw InvalidArgument("loss: shape mismatch");
  }
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

CMatrix sample_chain(const MeanModel& model, const DiffusionSchedule& sched, Eigen::Index spatial, Rng& rng) {
  const Eigen::Index n = sched.length();
  CMatrix x = scale_columns(draw_noise(spatial, n, rng), sched.sigma_bar[sched.steps()]);
  for (int t = sched.steps(); t >= 1; --t) {
    CMatrix mu = model(x, t);
    if (mu.rows() != spatial || mu.cols() != n) throw InvalidArgument("sampler: model output shape mismatch");
    if (t > 1) {
      const RVector sd = sched.sigma_bar[t - 1].array() * sched.sigma(t) / sched.sigma_bar[t].array();
      mu += scale_columns(draw_noise(spatial, n, rng), sd);
    }
    x = std::move(mu);
  }
  return x;
}

ComplexSequence sample(const nn::HdtModel& model, const ConditionLabel& label, const DiffusionSchedule& sched,
                       Rng& rng) {
  if (sched.length() != model.config().length) {
    throw InvalidArgument("sampler: schedule length " + std::to_string(sched.length()) + " != model length " +
                          std::to_string(model.config().length));
  }
  const auto cond = model.encode(label);
  const MeanModel mean = [&](const CMatrix& x_t, int t) { return model.predict(x_t, cond, t); };
  return ComplexSequence(sample_chain(mean, sched, model.config().spatial, rng));
}

TrainingExample make_training_example(const CMatrix& x0, const DiffusionSchedule& sched, Rng& rng) {
  TrainingExample ex;
  ex.t = rng.uniform_int(1, sched.steps());
  const NoiseDraw noise{draw_noise(x0.rows(), x0.cols(), rng), 0};
  ex.x_t = destruct_to(ComplexSequence(x0), ex.t, sched, noise).values;
  ex.target = posterior_params(ex.x_t, x0, ex.t, sched).mu_tilde;
  return ex;
}

namespace {

struct ItemResult {
  double loss = 0.0;
  int t = 0;
  nn::Gradients grads;
};

bool all_finite(const nn::Gradients& grads) {
  for (const auto& g : grads) {
    if (!g.allFinite()) return false;
  }
  return true;
}

}  // namespace

TrainStepResult train_step(nn::HdtModel& model, const TrainBatch& batch, const DiffusionSchedule& sched,
                           std::uint64_t step_seed, AdamW& opt, Ema& ema, const TrainStepOptions& options) {
  const std::size_t b = batch.x0.size();
  if (b == 0 || batch.condition.size() != b) throw InvalidArgument("train_step: empty or inconsistent batch");

  std::vector<ItemResult> items(b);
  const auto& params = model.parameters();
  parallel_for(b, [&](std::size_t i) {
    Rng rng(derive_seed(step_seed, i, 0));
    const TrainingExample ex = make_training_example(batch.x0[i], sched, rng);
    nn::Graph g(&params, nn::GraphOptions{.record_gradients = true,
                                          .training = true,
                                          .dropout_seed = derive_seed(step_seed, i, 1)});
    const nn::Var loss = nn::mse(model.forward(g, ex.x_t, batch.condition[i], ex.t), ex.target);
    g.backward(loss);
    items[i].loss = loss.value()(0, 0).real();
    items[i].t = ex.t;
    items[i].grads = g.parameter_gradients();
  });

  TrainStepResult res;
  nn::Gradients grads = std::move(items[0].grads);
  for (std::size_t i = 0; i < b; ++i) {
    const auto& it = items[i];
    if (!std::isfinite(it.loss) || (i == 0 ? !all_finite(grads) : !all_finite(it.grads))) {
      std::ostringstream os;
      os << "non-finite loss or gradient at batch item " << i << " (t=" << it.t << ", loss=" << it.loss
         << ", grad norm=" << (i == 0 ? global_norm(grads) : global_norm(it.grads)) << ")";
      throw TrainingAborted(os.str());
    }
    res.loss += it.loss;
    res.steps.push_back(it.t);
    if (i > 0) {
      for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += it.grads[k];
    }
  }
  res.loss /= static_cast<double>(b);
  for (auto& g : grads) g /= static_cast<double>(b);
  res.grad_norm = clip_global_norm(grads, options.clip_norm);
  opt.step(model.parameters(), grads, options.lr);
  ema.update(model.parameters());
  return res;
}

}  // namespace tfd
