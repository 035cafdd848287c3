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

#include "tfdiff/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "json_util.hpp"
#include "tfdiff/error.hpp"
#include "tfdiff/parallel.hpp"

namespace tfd {

namespace {

constexpr std::uint64_t kBatchStream = 0x6261746368ULL;
constexpr std::uint64_t kStepStream = 0x73746570ULL;
constexpr std::uint64_t kInitStream = 0x696e6974ULL;

json train_config_json(const TrainConfig& c) {
  return json{{"lr", c.lr},
              {"lr_decay", c.lr_decay},
              {"lr_decay_interval", c.lr_decay_interval},
              {"ema_decay", c.ema_decay},
              {"dropout", c.dropout},
              {"batch_size", c.batch_size},
              {"max_steps", c.max_steps},
              {"seed", c.seed},
              {"clip_norm", c.clip_norm},
              {"adam", {{"beta1", c.adam.beta1},
                        {"beta2", c.adam.beta2},
                        {"eps", c.adam.eps},
                        {"weight_decay", c.adam.weight_decay}}},
              {"checkpoint_every", c.checkpoint_every},
              {"probe_every", c.probe_every},
              {"probe_count", c.probe_count},
              {"divergence_factor", c.divergence_factor},
              {"divergence_patience", c.divergence_patience},
              {"schedule", c.schedule},
              {"model", json::parse(nn::hdt_config_to_json(c.model))}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  f << text << '\n';
}

std::string ckpt_name(long long step) { return "ckpt_" + std::to_string(step) + ".bin"; }

struct LoopState {
  long long step = 0;
  double initial_loss = 0.0;
  int divergent_streak = 0;
  std::optional<double> initial_probe;
};

Checkpoint snapshot(const TrainConfig& cfg, const std::string& manifest, const LoopState& st,
                    const nn::HdtModel& model, const AdamW& opt, const Ema& ema) {
  Checkpoint c;
  c.step = st.step;
  c.config_json = json{{"kind", "hdt"}, {"train", train_config_json(cfg)}}.dump(2);
  c.manifest_json = manifest;
  json state{{"initial_loss", st.initial_loss},
             {"divergent_streak", st.divergent_streak},
             {"adam_steps", opt.steps()}};
  if (st.initial_probe) state["initial_probe"] = *st.initial_probe;
  c.state_json = state.dump(2);
  const auto& ps = model.parameters();
  for (std::size_t i = 0; i < ps.size(); ++i) c.tensors.emplace_back("param/" + ps[i].name, ps[i].value);
  for (std::size_t i = 0; i < ps.size(); ++i) c.tensors.emplace_back("adam_m/" + ps[i].name, opt.first_moment()[i]);
  for (std::size_t i = 0; i < ps.size(); ++i) c.tensors.emplace_back("adam_v/" + ps[i].name, opt.second_moment()[i]);
  for (std::size_t i = 0; i < ps.size(); ++i) c.tensors.emplace_back("ema/" + ps[i].name, ema.shadow()[i]);
  return c;
}

const CMatrix& tensor(const Checkpoint& c, const std::string& name, const CMatrix& like) {
  const CMatrix* t = c.find(name);
  if (!t) throw InvalidArgument("checkpoint: missing tensor " + name);
  if (t->rows() != like.rows() || t->cols() != like.cols()) {
    throw InvalidArgument("checkpoint: tensor " + name + " has the wrong shape");
  }
  return *t;
}

TrainConfig config_from_checkpoint(const Checkpoint& c) {
  const auto j = parse_json(c.config_json, "checkpoint config");
  if (j.value("kind", "") != "hdt") throw InvalidArgument("checkpoint: not a trained model");
  return train_config_from_json(j.at("train").dump());
}

nn::HdtConfig resolve_model_config(const TrainConfig& cfg, const Dataset& data) {
  nn::HdtConfig m = cfg.model;
  m.dropout = cfg.dropout;
  m.spatial = static_cast<int>(data.front().x.spatial());
  m.length = cfg.schedule.length;
  if (m.conditions.empty()) {
    std::vector<ConditionLabel> labels;
    for (const auto& e : data) labels.push_back(e.label);
    m.conditions = build_vocabulary(labels);
  }
  return m;
}

void check_dataset(const Dataset& data, const TrainConfig& cfg) {
  if (data.empty()) throw InvalidArgument("train: dataset is empty");
  const auto m = data.front().x.spatial();
  for (const auto& e : data) {
    if (e.x.spatial() != m || e.x.temporal() != cfg.schedule.length) {
      throw InvalidArgument("train: every sequence must be " + std::to_string(m) + "x" +
                            std::to_string(cfg.schedule.length) + " (schedule length)");
    }
    if (!e.x.is_finite()) throw InvalidArgument("train: dataset contains non-finite samples");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidArgument("train: lr must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidArgument("train: lr_decay must be in (0, 1]");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw InvalidArgument("train: ema_decay must be in [0, 1)");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("train: dropout must be in [0, 1)");
  if (batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
  if (max_steps < 0) throw InvalidArgument("train: max_steps must be >= 0");
  if (checkpoint_every < 0 || probe_every < 0) throw InvalidArgument("train: negative interval");
  if (probe_count < 1) throw InvalidArgument("train: probe_count must be >= 1");
  if (!(divergence_factor > 1.0) || divergence_patience < 1) throw InvalidArgument("train: bad divergence rule");
  schedule.validate();
  model.validate();
}

std::string train_config_to_json(const TrainConfig& cfg) { return train_config_json(cfg).dump(2); }

TrainConfig train_config_from_json(const std::string& text) {
  const auto j = parse_json(text, "config");
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  TrainConfig c;
  try {
    read_opt(j, "lr", c.lr);
    read_opt(j, "lr_decay", c.lr_decay);
    read_opt(j, "lr_decay_interval", c.lr_decay_interval);
    read_opt(j, "ema_decay", c.ema_decay);
    read_opt(j, "dropout", c.dropout);
    read_opt(j, "batch_size", c.batch_size);
    read_opt(j, "max_steps", c.max_steps);
    read_opt(j, "seed", c.seed);
    read_opt(j, "clip_norm", c.clip_norm);
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      read_opt(a, "beta1", c.adam.beta1);
      read_opt(a, "beta2", c.adam.beta2);
      read_opt(a, "eps", c.adam.eps);
      read_opt(a, "weight_decay", c.adam.weight_decay);
    }
    read_opt(j, "checkpoint_every", c.checkpoint_every);
    read_opt(j, "probe_every", c.probe_every);
    read_opt(j, "probe_count", c.probe_count);
    read_opt(j, "divergence_factor", c.divergence_factor);
    read_opt(j, "divergence_patience", c.divergence_patience);
    if (j.contains("schedule")) c.schedule = j.at("schedule").get<ScheduleConfig>();
    if (j.contains("model")) {
      c.model = nn::hdt_config_from_json(j.at("model").dump());
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string RunManifest::to_json() const {
  return json{{"config", parse_json(config_json, "manifest config")},
              {"seed", seed},
              {"code_version", code_version},
              {"dataset_digest", dataset_digest},
              {"metric_log", metric_log},
              {"ssim", {{"window", SsimOptions{}.window},
                        {"stride", SsimOptions{}.stride},
                        {"k1", SsimOptions{}.k1},
                        {"k2", SsimOptions{}.k2}}}}
      .dump(2);
}

TrainBatch make_batch(const nn::HdtModel& model, const Dataset& data, const std::vector<std::size_t>& indices) {
  TrainBatch b;
  for (auto i : indices) {
    b.x0.push_back(data.at(i).x.values);
    b.condition.push_back(model.encode(data.at(i).label));
  }
  return b;
}

double probe_loss(const nn::HdtModel& model, const Dataset& data, const DiffusionSchedule& sched,
                  std::uint64_t seed, int count) {
  std::vector<double> losses(static_cast<std::size_t>(count));
  parallel_for(losses.size(), [&](std::size_t i) {
    Rng rng(derive_seed(seed, i, 0x70726f6265ULL));
    const auto& e = data[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(data.size()) - 1))];
    const auto ex = make_training_example(e.x.values, sched, rng);
    losses[i] = training_loss(model.predict(ex.x_t, model.encode(e.label), ex.t), ex.target);
  });
  double s = 0.0;
  for (double l : losses) s += l;
  return s / count;
}

TrainResult train(const TrainConfig& cfg_in, const Dataset& data, const TrainOptions& options) {
  std::optional<Checkpoint> resume;
  TrainConfig cfg = cfg_in;
  if (options.resume) {
    resume = read_checkpoint(*options.resume);
    cfg = config_from_checkpoint(*resume);
    cfg.max_steps = cfg_in.max_steps;
  }
  cfg.validate();
  check_dataset(data, cfg);

  const DiffusionSchedule sched = build_schedule(cfg.schedule);
  nn::HdtModel model(resume ? cfg.model : resolve_model_config(cfg, data), derive_seed(cfg.seed, kInitStream));
  cfg.model = model.config();
  AdamW opt(model.parameters(), cfg.adam);
  Ema ema(model.parameters(), cfg.ema_decay);
  LoopState st;

  const bool files = !options.out_dir.empty();
  const auto log_path = files ? options.out_dir / "metrics.ndjson" : std::filesystem::path();
  RunManifest manifest{train_config_to_json(cfg), cfg.seed, TFDIFF_VERSION, dataset_digest(data),
                       log_path.string()};
  std::string manifest_json = manifest.to_json();

  if (resume) {
    auto& ps = model.parameters();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ps[i].value = tensor(*resume, "param/" + ps[i].name, ps[i].value);
      opt.first_moment()[i] = tensor(*resume, "adam_m/" + ps[i].name, ps[i].value);
      opt.second_moment()[i] = tensor(*resume, "adam_v/" + ps[i].name, ps[i].value);
      ema.shadow()[i] = tensor(*resume, "ema/" + ps[i].name, ps[i].value);
    }
    const auto s = parse_json(resume->state_json, "checkpoint state");
    st.step = resume->step;
    st.initial_loss = s.at("initial_loss").get<double>();
    st.divergent_streak = s.at("divergent_streak").get<int>();
    opt.set_steps(s.at("adam_steps").get<long long>());
    if (s.contains("initial_probe")) st.initial_probe = s.at("initial_probe").get<double>();
    manifest_json = resume->manifest_json;
  }

  std::ofstream log;
  if (files) {
    std::filesystem::create_directories(options.out_dir);
    const auto mpath = options.out_dir / "manifest.json";
    if (!std::filesystem::exists(mpath)) write_text(mpath, manifest_json);
    log.open(log_path, std::ios::app);
    if (!log) throw InvalidArgument("cannot write " + log_path.string());
  }

  const std::uint64_t probe_seed = derive_seed(cfg.seed, 0x70726f6265ULL);
  TrainResult result;
  if (cfg.probe_every > 0 && !st.initial_probe) {
    st.initial_probe = probe_loss(model, data, sched, probe_seed, cfg.probe_count);
  }
  result.initial_probe = st.initial_probe;

  const int n = static_cast<int>(data.size());
  for (long long step = st.step + 1; step <= cfg.max_steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng brng(derive_seed(cfg.seed, static_cast<std::uint64_t>(step), kBatchStream));
    std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.batch_size));
    for (auto& i : idx) i = static_cast<std::size_t>(brng.uniform_int(0, n - 1));
    const TrainBatch batch = make_batch(model, data, idx);
    const double lr = step_decay_lr(cfg.lr, cfg.lr_decay, cfg.lr_decay_interval, step - 1);
    TrainStepResult res;
    try {
      res = train_step(model, batch, sched, derive_seed(cfg.seed, static_cast<std::uint64_t>(step), kStepStream), opt,
                       ema, {lr, cfg.clip_norm});
    } catch (const TrainingAborted& e) {
      if (files) write_text(options.out_dir / "run_notes.json",
                            json{{"status", "aborted"}, {"step", step}, {"note", e.what()}}.dump(2));
      throw;
    }
    st.step = step;
    if (step == 1) st.initial_loss = res.loss;

    MetricRecord rec{step, res.loss, lr, res.grad_norm,
                     std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(),
                     std::nullopt, std::nullopt};
    if (cfg.probe_every > 0 && (step % cfg.probe_every == 0 || step == cfg.max_steps)) {
      rec.probe_loss = probe_loss(model, data, sched, probe_seed, cfg.probe_count);
      result.final_probe = rec.probe_loss;
      nn::HdtModel shadow = model;
      ema.copy_to(shadow.parameters());
      rec.probe_loss_ema = probe_loss(shadow, data, sched, probe_seed, cfg.probe_count);
      result.final_probe_ema = rec.probe_loss_ema;
    }
    if (files) {
      json line{{"step", rec.step}, {"loss", rec.loss}, {"lr", rec.lr}, {"grad_norm", rec.grad_norm},
                {"wall_ms", rec.wall_ms}};
      if (rec.probe_loss) line["probe_loss"] = *rec.probe_loss;
      if (rec.probe_loss_ema) line["probe_loss_ema"] = *rec.probe_loss_ema;
      log << line.dump() << '\n';
      log.flush();
    }
    result.records.push_back(rec);
    if (options.on_step) options.on_step(rec);

    st.divergent_streak = res.loss > cfg.divergence_factor * st.initial_loss ? st.divergent_streak + 1 : 0;
    if (st.divergent_streak >= cfg.divergence_patience) {
      const std::string note = "loss exceeded " + std::to_string(cfg.divergence_factor) + "x the initial loss for " +
                               std::to_string(st.divergent_streak) + " consecutive steps (step " +
                               std::to_string(step) + ")";
      if (files) {
        write_text(options.out_dir / "run_notes.json",
                   json{{"status", "diverged"}, {"step", step}, {"note", note}}.dump(2));
      }
      throw TrainingAborted("training diverged: " + note);
    }
    if (files && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 && step != cfg.max_steps) {
      write_checkpoint(options.out_dir / ckpt_name(step), snapshot(cfg, manifest_json, st, model, opt, ema));
    }
  }

  result.steps = st.step;
  result.initial_loss = st.initial_loss;
  result.final_loss = result.records.empty() ? st.initial_loss : result.records.back().loss;
  result.final_checkpoint = snapshot(cfg, manifest_json, st, model, opt, ema);
  if (files) {
    result.checkpoint_path = options.out_dir / ckpt_name(st.step);
    write_checkpoint(result.checkpoint_path, result.final_checkpoint);
  }
  return result;
}

GenerativeModel GenerativeModel::from_checkpoint(const Checkpoint& c, bool use_ema) {
  const auto j = parse_json(c.config_json, "checkpoint config");
  const std::string kind = j.value("kind", "");
  GenerativeModel g;
  if (kind == "oracle") {
    try {
      g.schedule_ = j.at("schedule").get<ScheduleConfig>();
      g.spatial_ = j.at("spatial").get<Eigen::Index>();
      for (const auto& f : j.at("conditions")) {
        g.vocabulary_.push_back({f.at("name").get<std::string>(), f.at("values").get<std::vector<std::string>>()});
      }
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("checkpoint: ") + e.what());
    }
    for (const auto& [name, t] : c.tensors) {
      if (name.rfind("exemplar/", 0) == 0) g.exemplars_[name.substr(9)] = t;
    }
    return g;
  }
  const TrainConfig cfg = config_from_checkpoint(c);
  nn::HdtModel model(cfg.model, 0);
  for (auto& p : model.parameters()) p.value = tensor(c, (use_ema ? "ema/" : "param/") + p.name, p.value);
  return from_hdt(std::move(model), cfg.schedule);
}

GenerativeModel GenerativeModel::load(const std::filesystem::path& path, bool use_ema) {
  return from_checkpoint(read_checkpoint(path), use_ema);
}

GenerativeModel GenerativeModel::from_hdt(nn::HdtModel model, ScheduleConfig schedule) {
  if (schedule.length != model.config().length) throw InvalidArgument("model and schedule lengths differ");
  GenerativeModel g;
  g.schedule_ = schedule;
  g.vocabulary_ = model.config().conditions;
  g.spatial_ = model.config().spatial;
  g.model_.emplace(std::move(model));
  return g;
}

GenerativeModel GenerativeModel::oracle(const Dataset& exemplars, ScheduleConfig schedule) {
  return from_checkpoint(make_oracle_checkpoint(exemplars, schedule));
}

Checkpoint make_oracle_checkpoint(const Dataset& exemplars, const ScheduleConfig& schedule) {
  if (exemplars.empty()) throw InvalidArgument("oracle: no exemplars");
  std::vector<ConditionLabel> labels;
  for (const auto& e : exemplars) labels.push_back(e.label);
  json fields = json::array();
  for (const auto& f : build_vocabulary(labels)) fields.push_back({{"name", f.name}, {"values", f.values}});
  Checkpoint c;
  c.config_json = json{{"kind", "oracle"},
                       {"schedule", schedule},
                       {"spatial", exemplars.front().x.spatial()},
                       {"conditions", fields}}
                      .dump(2);
  std::set<std::string> seen;
  for (const auto& e : exemplars) {
    if (e.x.temporal() != schedule.length) throw InvalidArgument("oracle: exemplar length differs from schedule");
    const auto key = format_condition(e.label);
    if (seen.insert(key).second) c.tensors.emplace_back("exemplar/" + key, e.x.values);
  }
  return c;
}

void GenerativeModel::check_label(const ConditionLabel& label) const {
  (void)encode_condition(vocabulary_, label);
  if (!model_ && !exemplars_.contains(format_condition(label))) {
    throw InvalidArgument("oracle has no exemplar for condition " + format_condition(label));
  }
}

ComplexSequence GenerativeModel::sample(const ConditionLabel& label, const DiffusionSchedule& sched, Rng& rng) const {
  check_label(label);
  if (model_) return tfd::sample(*model_, label, sched, rng);
  const CMatrix& x0 = exemplars_.at(format_condition(label));
  const MeanModel oracle = [&](const CMatrix& x_t, int t) { return posterior_params(x_t, x0, t, sched).mu_tilde; };
  return ComplexSequence(sample_chain(oracle, sched, spatial_, rng));
}

double EvalReport::margin() const {
  std::vector<double> d;
  for (std::size_t i = 0; i < same.size() && i < cross.size(); ++i) d.push_back(same[i] - cross[i]);
  return mean(d);
}

std::string EvalReport::to_json() const {
  auto nan_safe = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json conds = json::array();
  for (const auto& c : conditions) {
    conds.push_back({{"condition", c.label},
                     {"samples", c.samples},
                     {"same_condition_ssim", nan_safe(c.same_ssim)},
                     {"cross_condition_ssim", nan_safe(c.cross_ssim)}});
  }
  auto test_json = [&](const std::optional<TTest>& t) -> json {
    if (!t) return nullptr;
    return {{"mean_difference", nan_safe(t->mean_difference)},
            {"statistic", nan_safe(t->statistic)},
            {"p_value", t->p_value},
            {"dof", t->dof},
            {"n", t->n}};
  };
  return json{{"conditions", conds},
              {"same_condition_ssim", nan_safe(mean(same))},
              {"cross_condition_ssim", cross.empty() ? json(nullptr) : nan_safe(mean(cross))},
              {"margin", cross.empty() ? json(nullptr) : nan_safe(margin())},
              {"paired_test", test_json(paired)},
              {"welch_test", test_json(welch)},
              {"alpha", alpha},
              {"same_exceeds_cross", same_exceeds_cross()}}
      .dump(2);
}

EvalReport evaluate(const GenerativeModel& model, const Dataset& eval_set, const EvalConfig& cfg) {
  if (eval_set.empty()) throw InvalidArgument("evaluate: empty eval set");
  if (cfg.samples_per_condition < 1) throw InvalidArgument("evaluate: samples_per_condition must be >= 1");
  std::vector<ConditionLabel> labels;
  std::set<std::string> seen;
  for (const auto& e : eval_set) {
    if (e.x.spatial() != model.spatial() || e.x.temporal() != model.length()) {
      throw InvalidArgument("evaluate: eval sequence shape differs from the model");
    }
    if (seen.insert(format_condition(e.label)).second) {
      model.check_label(e.label);
      labels.push_back(e.label);
    }
  }
  const DiffusionSchedule sched = build_schedule(model.schedule());
  const std::size_t k = static_cast<std::size_t>(cfg.samples_per_condition);
  std::vector<ComplexSequence> samples(labels.size() * k);
  parallel_for(samples.size(), [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, i / k, i % k));
    samples[i] = model.sample(labels[i / k], sched, rng);
  });

  EvalReport r;
  r.alpha = cfg.alpha;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    ConditionScore score{labels[c], 0.0, 0.0, static_cast<int>(k)};
    std::vector<double> same_c, cross_c;
    for (std::size_t s = 0; s < k; ++s) {
      const auto& x = samples[c * k + s];
      double same = 0.0, cross = 0.0;
      int ns = 0, nc = 0;
      for (const auto& e : eval_set) {
        const double v = complex_ssim(x, e.x);
        if (e.label == labels[c]) {
          same += v;
          ++ns;
        } else {
          cross += v;
          ++nc;
        }
      }
      same_c.push_back(same / ns);
      r.same.push_back(same / ns);
      if (nc > 0) {
        cross_c.push_back(cross / nc);
        r.cross.push_back(cross / nc);
      }
    }
    score.same_ssim = mean(same_c);
    score.cross_ssim = cross_c.empty() ? std::nan("") : mean(cross_c);
    r.conditions.push_back(score);
  }
  if (r.cross.size() == r.same.size() && r.same.size() >= 2) {
    r.paired = paired_t_test_greater(r.same, r.cross);
    r.welch = welch_t_test(r.same, r.cross);
  }
  return r;
}

}  // namespace tfd
