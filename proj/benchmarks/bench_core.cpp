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

#include <benchmark/benchmark.h>

#include <vector>

#include "tfdiff/forward.hpp"
#include "tfdiff/nn/hdt.hpp"
#include "tfdiff/nn/ops.hpp"
#include "tfdiff/optim.hpp"
#include "tfdiff/reverse.hpp"
#include "tfdiff/rng.hpp"
#include "tfdiff/schedule.hpp"
#include "tfdiff/signal.hpp"

using namespace tfd;

namespace {

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return draw_noise(rows, cols, rng);
}

const DiffusionSchedule& default_schedule() {
  static const DiffusionSchedule sched = build_schedule({});
  return sched;
}

}  // namespace

static void BM_Dft(benchmark::State& state) {
  const auto n = state.range(0);
  const CMatrix x = random_matrix(1, n, 1);
  const std::vector<cplx> v(x.data(), x.data() + n);
  for (auto _ : state) benchmark::DoNotOptimize(dft(v));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Dft)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_DestructStep(benchmark::State& state) {
  const auto& sched = default_schedule();
  const ComplexSequence x(random_matrix(8, 64, 2));
  const NoiseDraw noise = draw_noise(8, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(destruct_step(x, 150, sched, noise));
}
BENCHMARK(BM_DestructStep);

static void BM_DestructStepSpectral(benchmark::State& state) {
  const auto& sched = default_schedule();
  const ComplexSequence x(random_matrix(8, 64, 2));
  const NoiseDraw noise = draw_noise(8, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(destruct_step_spectral(x, 150, sched, noise));
}
BENCHMARK(BM_DestructStepSpectral);

static void BM_Attention(benchmark::State& state) {
  const auto n = state.range(0);
  const CMatrix q = random_matrix(n, 32, 4), k = random_matrix(n, 32, 5), v = random_matrix(n, 32, 6);
  for (auto _ : state) {
    nn::Graph g;
    benchmark::DoNotOptimize(nn::complex_attention(g.constant(q), g.constant(k), g.constant(v), {2, 0, 0}));
  }
}
BENCHMARK(BM_Attention)->Arg(8)->Arg(64);

static void BM_HdtPredict(benchmark::State& state) {
  const nn::HdtModel model({}, 7);
  const CMatrix x = random_matrix(8, 64, 8);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(x, {}, 100));
}
BENCHMARK(BM_HdtPredict)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state) {
  nn::HdtModel model({}, 9);
  AdamW opt(model.parameters());
  Ema ema(model.parameters(), 0.999);
  TrainBatch batch;
  for (int i = 0; i < 4; ++i) {
    batch.x0.push_back(random_matrix(8, 64, 10 + i) / 8.0);
    batch.condition.push_back({});
  }
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(model, batch, default_schedule(), ++seed, opt, ema, {}));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
