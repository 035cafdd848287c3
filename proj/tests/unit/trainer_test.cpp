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

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "tfdiff/error.hpp"
#include "tfdiff/trainer.hpp"

using namespace tfd;
using tfd::testing::random_matrix;
using tfd::testing::temp_dir;

namespace {

nn::ParameterSet two_params() {
  nn::ParameterSet ps;
  ps.add("a", random_matrix(2, 3, 1));
  ps.add("b", random_matrix(1, 4, 2), true);
  ps[1].value = ps[1].value.real().cast<cplx>();
  return ps;
}

Dataset tiny_data(int per_class = 4) {
  SyntheticSpec spec;
  spec.class_count = 2;
  spec.per_class = per_class;
  spec.spatial = 2;
  spec.length = 8;
  spec.doppler = {-3.0, 3.0};
  return generate(spec);
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.batch_size = 2;
  c.max_steps = 6;
  c.checkpoint_every = 3;
  c.probe_every = 3;
  c.probe_count = 4;
  c.schedule.length = 8;
  c.schedule.steps = 20;
  c.schedule.beta_end = 0.2;
  c.schedule.blur_end = 1.0;
  c.model.dim = 8;
  c.model.heads = 2;
  c.model.spatial_blocks = 1;
  c.model.deblur_blocks = 1;
  c.model.step_sinusoid_dim = 16;
  c.model.step_dim = 8;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("EMA with zero decay tracks the weights") {
  auto ps = two_params();
  Ema ema(ps, 0.0);
  ps[0].value *= 3.0;
  ema.update(ps);
  CHECK(ema.shadow()[0] == ps[0].value);
  CHECK(ema.shadow()[1] == ps[1].value);
}

TEST_CASE("EMA converges geometrically to constant weights") {
  auto ps = two_params();
  const CMatrix start = ps[0].value;
  Ema ema(ps, 0.999);
  ps[0].value = random_matrix(2, 3, 9);
  for (int k = 1; k <= 2000; ++k) {
    ema.update(ps);
    if (k % 500 == 0) {
      const CMatrix expected = ps[0].value + std::pow(0.999, k) * (start - ps[0].value);
      CHECK((ema.shadow()[0] - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  nn::ParameterSet copy = two_params();
  ema.copy_to(copy);
  CHECK(copy[0].value == ema.shadow()[0]);
  CHECK_THROWS_AS(Ema(ps, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Ema(ps, -0.1), InvalidArgument);
}

TEST_CASE("step learning-rate decay") {
  CHECK(step_decay_lr(1e-3, 0.5, 10000, 0) == 1e-3);
  CHECK(step_decay_lr(1e-3, 0.5, 10000, 9999) == 1e-3);
  for (int m = 1; m <= 5; ++m) {
    CHECK(step_decay_lr(1e-3, 0.5, 10000, 10000LL * m) == 1e-3 * std::pow(0.5, m));
    CHECK(step_decay_lr(1e-3, 0.5, 10000, 10000LL * m + 4321) == 1e-3 * std::pow(0.5, m));
  }
  CHECK(step_decay_lr(2e-3, 0.5, 0, 123456) == 2e-3);
}

TEST_CASE("gradient clipping") {
  nn::Gradients g{CMatrix::Constant(1, 1, cplx{3.0, 0.0}), CMatrix::Constant(1, 1, cplx{0.0, 4.0})};
  CHECK(global_norm(g) == 5.0);
  CHECK(clip_global_norm(g, 1.0) == 5.0);
  CHECK(global_norm(g) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(clip_global_norm(g, 10.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(global_norm(g) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("AdamW first step moves each real coordinate by lr against the gradient sign") {
  auto ps = two_params();
  const auto before = ps;
  AdamW opt(ps);
  nn::Gradients g{random_matrix(2, 3, 3), random_matrix(1, 4, 4)};
  const double lr = 0.01, wd = 0.01;
  opt.step(ps, g, lr);
  CHECK(opt.steps() == 1);
  for (Eigen::Index k = 0; k < 6; ++k) {
    const cplx w = before[0].value(k), gk = g[0](k);
    const double re = w.real() * (1 - lr * wd) - lr * gk.real() / (std::abs(gk.real()) + 1e-8);
    const double im = w.imag() * (1 - lr * wd) - lr * gk.imag() / (std::abs(gk.imag()) + 1e-8);
    CHECK(std::abs(ps[0].value(k) - cplx{re, im}) < 1e-15);
  }
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(ps[1].value(k).imag() == 0.0);
  CHECK_THROWS_AS(opt.step(ps, {g[0]}, lr), InvalidArgument);
}

TEST_CASE("checkpoint binary round trip and corruption") {
  Checkpoint c;
  c.step = 42;
  c.config_json = R"({"a":1})";
  c.state_json = R"({"b":[1,2]})";
  c.tensors = {{"x", random_matrix(3, 2, 5)}, {"empty", CMatrix(0, 4)}};
  const std::string bytes = encode_checkpoint(c);
  const Checkpoint d = decode_checkpoint(bytes);
  CHECK(d.step == 42);
  CHECK(d.config_json == c.config_json);
  CHECK(d.state_json == c.state_json);
  CHECK(d.manifest_json == "{}");
  REQUIRE(d.tensors.size() == 2);
  CHECK(*d.find("x") == c.tensors[0].second);
  CHECK(d.find("empty")->cols() == 4);
  CHECK(d.find("missing") == nullptr);

  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), Error);
  bad = bytes;
  bad[8] = 9;
  CHECK_THROWS_AS(decode_checkpoint(bad), Error);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), Error);
  CHECK_THROWS_AS(decode_checkpoint(bytes + "z"), Error);
  CHECK_THROWS_AS(decode_checkpoint(""), Error);

  const auto dir = temp_dir("ckpt");
  write_checkpoint(dir / "c.bin", c);
  CHECK(encode_checkpoint(read_checkpoint(dir / "c.bin")) == bytes);
  CHECK_THROWS_AS(read_checkpoint(dir / "absent.bin"), Error);
}

TEST_CASE("training config JSON") {
  TrainConfig c = tiny_config();
  c.lr = 2e-3;
  c.seed = 77;
  c.schedule.blur_enabled = false;
  c.adam.weight_decay = 0.05;
  const TrainConfig back = train_config_from_json(train_config_to_json(c));
  CHECK(back.lr == 2e-3);
  CHECK(back.seed == 77);
  CHECK_FALSE(back.schedule.blur_enabled);
  CHECK(back.schedule.steps == 20);
  CHECK(back.model.dim == 8);
  CHECK(back.adam.weight_decay == 0.05);
  CHECK(train_config_from_json("{}").max_steps == 5000);
  CHECK_THROWS_AS(train_config_from_json(R"({"lr": 0})"), InvalidArgument);
  CHECK_THROWS_AS(train_config_from_json(R"({"ema_decay": 1.0})"), InvalidArgument);
  CHECK_THROWS_AS(train_config_from_json(R"({"lr": "fast"})"), InvalidArgument);
  CHECK_THROWS_AS(train_config_from_json("{"), InvalidArgument);
}

TEST_CASE("training is deterministic and resume is bit-exact") {
  const Dataset data = tiny_data();
  const TrainConfig cfg = tiny_config();
  const auto dir_a = temp_dir("train_a"), dir_b = temp_dir("train_b"), dir_c = temp_dir("train_c");

  const TrainResult a = train(cfg, data, {dir_a});
  CHECK(a.steps == 6);
  CHECK(a.records.size() == 6);
  CHECK(std::filesystem::exists(dir_a / "manifest.json"));
  CHECK(std::filesystem::exists(dir_a / "ckpt_3.bin"));
  CHECK(std::filesystem::exists(dir_a / "ckpt_6.bin"));
  CHECK(a.checkpoint_path == dir_a / "ckpt_6.bin");
  REQUIRE(a.initial_probe.has_value());
  REQUIRE(a.final_probe.has_value());
  std::istringstream log(slurp(dir_a / "metrics.ndjson"));
  int lines = 0;
  for (std::string line; std::getline(log, line);) ++lines;
  CHECK(lines == 6);
  const std::string manifest = slurp(dir_a / "manifest.json");
  CHECK(manifest.find(dataset_digest(data)) != std::string::npos);

  const TrainResult again = train(cfg, data, {dir_c});
  CHECK(again.final_checkpoint.tensors == a.final_checkpoint.tensors);
  CHECK(again.final_checkpoint.state_json == a.final_checkpoint.state_json);
  CHECK(again.final_checkpoint.config_json == a.final_checkpoint.config_json);

  TrainConfig half = cfg;
  half.max_steps = 3;
  (void)train(half, data, {dir_b});
  TrainOptions resume{dir_b};
  resume.resume = dir_b / "ckpt_3.bin";
  const TrainResult b = train(cfg, data, resume);
  CHECK(b.records.size() == 3);
  CHECK(b.records.front().step == 4);
  for (int i = 0; i < 3; ++i) CHECK(b.records[i].loss == a.records[i + 3].loss);
  CHECK(b.final_checkpoint.tensors == a.final_checkpoint.tensors);
  CHECK(b.final_checkpoint.step == 6);

  const auto ema_model = GenerativeModel::from_checkpoint(a.final_checkpoint, true);
  const auto raw_model = GenerativeModel::from_checkpoint(a.final_checkpoint, false);
  CHECK(ema_model.hdt()->parameters()[0].value != raw_model.hdt()->parameters()[0].value);

  CHECK_THROWS_AS(train(cfg, {}, {}), InvalidArgument);
}

TEST_CASE("divergence aborts with a run note") {
  const Dataset data = tiny_data();
  TrainConfig cfg = tiny_config();
  cfg.lr = 50.0;
  cfg.clip_norm = 0.0;
  cfg.divergence_factor = 2.0;
  cfg.divergence_patience = 2;
  cfg.max_steps = 200;
  const auto dir = temp_dir("diverge");
  CHECK_THROWS_AS(train(cfg, data, {dir}), TrainingAborted);
  CHECK(std::filesystem::exists(dir / "run_notes.json"));
}

TEST_CASE("oracle model recovers its exemplars") {
  Dataset exemplars;
  for (int c = 0; c < 3; ++c) exemplars.push_back({ComplexSequence(random_matrix(2, 8, 20 + c)), {{"class", std::to_string(c)}}});
  ScheduleConfig sc = tiny_config().schedule;
  const auto model = GenerativeModel::oracle(exemplars, sc);
  CHECK(model.is_oracle());
  CHECK_THROWS_AS(model.check_label({{"class", "9"}}), InvalidArgument);
  const EvalReport r = evaluate(model, exemplars, {3, 1, 0.01});
  for (double s : r.same) CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.same_exceeds_cross());
  CHECK(r.margin() > 0.5);

  const auto reloaded = GenerativeModel::from_checkpoint(decode_checkpoint(encode_checkpoint(make_oracle_checkpoint(exemplars, sc))));
  const EvalReport r2 = evaluate(reloaded, exemplars, {3, 1, 0.01});
  CHECK(r2.same == r.same);
  CHECK(r2.to_json().find("\"same_exceeds_cross\"") != std::string::npos);
}

TEST_CASE("an untrained model does not separate conditions") {
  TrainConfig cfg = tiny_config();
  const Dataset data = tiny_data();
  cfg.model.spatial = 2;
  cfg.model.length = 8;
  cfg.model.conditions = build_vocabulary({data[0].label, data.back().label});
  const auto model = GenerativeModel::from_hdt(nn::HdtModel(cfg.model, 3), cfg.schedule);
  const EvalReport r = evaluate(model, data, {6, 2, 0.01});
  CHECK(r.same.size() == 12);
  REQUIRE(r.welch.has_value());
  CHECK(r.welch->p_value > 0.01);
  CHECK_FALSE(r.same_exceeds_cross());
}

TEST_CASE("four-sample overfit on the toy model" * doctest::skip()) {
  SyntheticSpec spec;
  spec.class_count = 2;
  spec.per_class = 2;
  const Dataset data = generate(spec);
  TrainConfig cfg;
  cfg.max_steps = 2000;
  cfg.probe_every = 500;
  cfg.probe_count = 64;
  cfg.checkpoint_every = 0;
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult r = train(cfg, data, {});
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  MESSAGE("probe " << *r.initial_probe << " -> " << *r.final_probe << " in " << minutes << " min");
  CHECK(*r.final_probe < 0.01 * *r.initial_probe);
  CHECK(minutes < 10.0);
}
