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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfdiff/checkpoint.hpp"
#include "tfdiff/datagen.hpp"
#include "tfdiff/nn/hdt.hpp"
#include "tfdiff/optim.hpp"
#include "tfdiff/reverse.hpp"
#include "tfdiff/schedule.hpp"
#include "tfdiff/stats.hpp"

namespace tfd {

struct TrainConfig {
  double lr = 1e-3;
  double lr_decay = 0.5;
  long long lr_decay_interval = 10000;
  double ema_decay = 0.999;
  double dropout = 0.1;  // overrides model.dropout
  int batch_size = 4;
  long long max_steps = 5000;
  std::uint64_t seed = 0;
  double clip_norm = 1.0;
  AdamWConfig adam;
  long long checkpoint_every = 1000;  // 0 writes only the final checkpoint
  long long probe_every = 0;          // 0 disables the fixed-probe loss
  int probe_count = 64;
  double divergence_factor = 1e3;
  int divergence_patience = 100;
  ScheduleConfig schedule;
  nn::HdtConfig model;

  void validate() const;
};

std::string train_config_to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults. Accepts "schedule" and "model" objects.
TrainConfig train_config_from_json(const std::string& text);

/// Provenance written next to the checkpoints before step 0.
struct RunManifest {
  std::string config_json;
  std::uint64_t seed = 0;
  std::string code_version;
  std::string dataset_digest;
  std::string metric_log;
  std::string to_json() const;
};

struct MetricRecord {
  long long step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
  std::optional<double> probe_loss;
  std::optional<double> probe_loss_ema;  // same draws, EMA weights
};

struct TrainOptions {
  /// Output directory for checkpoints, manifest and metric log; empty keeps
  /// everything in memory.
  std::filesystem::path out_dir;
  /// Checkpoint to continue from. Its configuration wins except max_steps.
  std::optional<std::filesystem::path> resume;
  std::function<void(const MetricRecord&)> on_step;
};

struct TrainResult {
  long long steps = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<MetricRecord> records;  // steps run by this call
  std::optional<double> initial_probe;
  std::optional<double> final_probe;
  std::optional<double> final_probe_ema;
  Checkpoint final_checkpoint;
  std::filesystem::path checkpoint_path;  // empty when out_dir is empty
};

/// Runs the optimization loop. Throws TrainingAborted on divergence (after
/// writing run_notes.json when out_dir is set) or on non-finite losses.
TrainResult train(const TrainConfig& cfg, const Dataset& data, const TrainOptions& options = {});

/// Mean loss over `count` fixed (item, t, eps) draws, dropout off.
double probe_loss(const nn::HdtModel& model, const Dataset& data, const DiffusionSchedule& sched,
                  std::uint64_t seed, int count);

/// Encodes a dataset's labels against the model vocabulary.
TrainBatch make_batch(const nn::HdtModel& model, const Dataset& data, const std::vector<std::size_t>& indices);

/// A sampler restored from a checkpoint: either a trained HDT (EMA weights
/// by default) or a posterior oracle that knows one exemplar per condition.
class GenerativeModel {
 public:
  static GenerativeModel load(const std::filesystem::path& path, bool use_ema = true);
  static GenerativeModel from_checkpoint(const Checkpoint& ckpt, bool use_ema = true);
  static GenerativeModel from_hdt(nn::HdtModel model, ScheduleConfig schedule);
  static GenerativeModel oracle(const Dataset& exemplars, ScheduleConfig schedule);

  const ScheduleConfig& schedule() const { return schedule_; }
  const std::vector<ConditionField>& vocabulary() const { return vocabulary_; }
  Eigen::Index spatial() const { return spatial_; }
  Eigen::Index length() const { return schedule_.length; }
  bool is_oracle() const { return !model_.has_value(); }
  const nn::HdtModel* hdt() const { return model_ ? &*model_ : nullptr; }

  /// Throws InvalidArgument if the label is outside the vocabulary.
  void check_label(const ConditionLabel& label) const;
  ComplexSequence sample(const ConditionLabel& label, const DiffusionSchedule& sched, Rng& rng) const;

 private:
  GenerativeModel() = default;
  ScheduleConfig schedule_;
  std::vector<ConditionField> vocabulary_;
  Eigen::Index spatial_ = 0;
  std::optional<nn::HdtModel> model_;
  std::map<std::string, CMatrix> exemplars_;  // formatted label -> x0
};

Checkpoint make_oracle_checkpoint(const Dataset& exemplars, const ScheduleConfig& schedule);

struct EvalConfig {
  int samples_per_condition = 8;
  std::uint64_t seed = 0;
  double alpha = 0.01;
};

struct ConditionScore {
  ConditionLabel label;
  double same_ssim = 0.0;
  double cross_ssim = 0.0;
  int samples = 0;
};

struct EvalReport {
  std::vector<ConditionScore> conditions;
  std::vector<double> same;   // per sample: mean SSIM to same-condition exemplars
  std::vector<double> cross;  // per sample: mean SSIM to other-condition exemplars
  std::optional<TTest> paired;  // H1: same > cross
  std::optional<TTest> welch;   // H1: same != cross
  double alpha = 0.01;
  bool same_exceeds_cross() const { return paired && paired->p_value < alpha; }
  double margin() const;  // mean(same - cross)
  std::string to_json() const;
};

/// Samples `samples_per_condition` sequences for each distinct label of
/// eval_set and scores them with complex SSIM against the eval exemplars.
EvalReport evaluate(const GenerativeModel& model, const Dataset& eval_set, const EvalConfig& cfg);

}  // namespace tfd
