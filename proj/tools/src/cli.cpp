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

#include "tfdiff/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tfdiff/checkpoint.hpp"
#include "tfdiff/condition.hpp"
#include "tfdiff/cseq_io.hpp"
#include "tfdiff/datagen.hpp"
#include "tfdiff/error.hpp"
#include "tfdiff/forward.hpp"
#include "tfdiff/schedule.hpp"
#include "tfdiff/signal.hpp"
#include "tfdiff/trainer.hpp"

namespace tfd::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config;
  std::string out;
  bool verbose = false;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path out_dir(const Globals& g) {
  fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  return dir;
}

std::vector<int> parse_steps(const std::string& text) {
  std::vector<int> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int t = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      steps.push_back(t);
    } catch (const std::exception&) {
      throw InvalidArgument("--steps: '" + item + "' is not an integer");
    }
  }
  if (steps.empty()) throw InvalidArgument("--steps: no steps given");
  return steps;
}

// Temporal-DFT magnitude of each spatial row as an 8-bit PGM (rows = M).
void write_spectrogram(const fs::path& path, const ComplexSequence& x) {
  const CMatrix s = dft(x).values;
  const double peak = s.cwiseAbs().maxCoeff();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  f << "P5\n" << s.cols() << ' ' << s.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      const double v = peak > 0.0 ? std::abs(s(r, c)) / peak : 0.0;
      f.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
}

ScheduleConfig load_schedule_config(const Globals& g) {
  if (g.config.empty()) return {};
  return schedule_config_from_json(read_file(g.config));
}

int cmd_schedule_verify(const Globals& g, const std::string& dump, std::ostream& out, std::ostream& err) {
  const ScheduleConfig cfg = load_schedule_config(g);
  cfg.validate();
  DiffusionSchedule sched;
  try {
    sched = build_schedule(cfg);
  } catch (const ConvergenceViolation& v) {
    err << "schedule rejected: " << v.what() << '\n';
    out << "violations (t, n):";
    const std::size_t shown = g.verbose ? v.indices().size() : std::min<std::size_t>(v.indices().size(), 20);
    for (std::size_t i = 0; i < shown; ++i) out << " (" << v.indices()[i].first << ", " << v.indices()[i].second << ")";
    if (shown < v.indices().size()) out << " ... " << v.indices().size() << " total";
    out << '\n';
    return kVerificationFailed;
  }
  const auto rep = verify_convergence(sched);
  const int T = sched.steps();
  out << "     t        alpha         beta     blur_std    gamma_max  gamma_bar_max  sigma_bar_max\n";
  for (int t = 1; t <= T; ++t) {
    if (!g.verbose && !(t == 1 || t == T || t % std::max(1, T / 10) == 0)) continue;
    char line[160];
    std::snprintf(line, sizeof line, "%6d %12.8f %12.6g %12.6g %12.8f %14.6g %14.6g\n", t, sched.alpha[t], sched.beta[t],
                  sched.blur_std[t], sched.gamma[t].maxCoeff(), sched.gamma_bar[t].maxCoeff(),
                  sched.sigma_bar[t].maxCoeff());
    out << line;
  }
  out << "alpha_min: " << rep.alpha_min << '\n';
  out << "gamma_bar[T] max: " << rep.max_gamma_bar_final << '\n';
  out << "sigma_bar[T] bound margin (min over n): " << rep.min_bound_margin << '\n';
  out << "recursion max error: " << rep.max_recursion_error << '\n';
  if (!dump.empty()) {
    std::ofstream f(dump);
    if (!f) throw InvalidArgument("cannot write " + dump);
    f << schedule_to_json(sched) << '\n';
  }
  if (!rep.passed) {
    out << "FAIL:";
    if (!rep.gamma_violations.empty()) out << ' ' << rep.gamma_violations.size() << " gamma >= 1;";
    if (!rep.bound_violations.empty()) {
      out << " bound violated at n =";
      for (int n : rep.bound_violations) out << ' ' << n;
      out << ';';
    }
    if (!rep.monotonic_violations.empty()) out << ' ' << rep.monotonic_violations.size() << " gamma_bar increases;";
    out << '\n';
    return kVerificationFailed;
  }
  out << "PASS\n";
  return kOk;
}

int cmd_destruct(const Globals& g, const std::string& input, const std::string& steps_text, bool spectrogram,
                 std::ostream& out) {
  const auto rec = read_cseq(input);
  ScheduleConfig cfg = load_schedule_config(g);
  if (g.config.empty()) cfg.length = static_cast<int>(rec.sequence.temporal());
  if (rec.sequence.temporal() != cfg.length) {
    throw InvalidArgument("input length " + std::to_string(rec.sequence.temporal()) + " != schedule length " +
                          std::to_string(cfg.length));
  }
  const auto steps = parse_steps(steps_text);
  for (int t : steps) {
    if (t < 0 || t > cfg.steps) {
      throw InvalidArgument("step " + std::to_string(t) + " outside [0, " + std::to_string(cfg.steps) + "]");
    }
  }
  const DiffusionSchedule sched = build_schedule(cfg);
  const fs::path dir = out_dir(g);
  for (int t : steps) {
    ComplexSequence x = rec.sequence;
    if (t > 0) {
      const auto noise = draw_noise(x.spatial(), x.temporal(), derive_seed(g.seed, static_cast<std::uint64_t>(t)));
      x = destruct_to(rec.sequence, t, sched, noise);
    }
    const fs::path path = dir / ("x_t" + std::to_string(t) + ".cseq");
    json meta = json::parse(rec.metadata_json.empty() ? "{}" : rec.metadata_json, nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) meta = json::object();
    meta["step"] = t;
    write_cseq(path, x, meta.dump());
    out << path.string() << '\n';
    if (spectrogram) write_spectrogram(dir / ("x_t" + std::to_string(t) + ".pgm"), x);
  }
  return kOk;
}

int cmd_train(const Globals& g, const std::string& data_path, const std::string& resume, long long steps,
              std::ostream& out, std::ostream& err) {
  TrainConfig cfg = g.config.empty() ? TrainConfig{} : train_config_from_json(read_file(g.config));
  if (g.seed_given) cfg.seed = g.seed;
  if (steps >= 0) cfg.max_steps = steps;
  Dataset data = load_dataset(data_path);
  if (data.empty()) throw InvalidArgument("dataset " + data_path + " is empty");
  data = preprocess_dataset(data, cfg.schedule.length);
  TrainOptions opts;
  opts.out_dir = out_dir(g);
  if (!resume.empty()) opts.resume = resume;
  if (g.verbose) {
    opts.on_step = [&err](const MetricRecord& r) {
      err << "step " << r.step << " loss " << r.loss << " grad_norm " << r.grad_norm << '\n';
    };
  }
  try {
    const auto res = train(cfg, data, opts);
    json report{{"steps", res.steps},
                {"initial_loss", res.initial_loss},
                {"final_loss", res.final_loss},
                {"checkpoint", res.checkpoint_path.string()}};
    if (res.initial_probe) report["initial_probe_loss"] = *res.initial_probe;
    if (res.final_probe) report["final_probe_loss"] = *res.final_probe;
    if (res.final_probe_ema) report["final_probe_loss_ema"] = *res.final_probe_ema;
    out << report.dump(2) << '\n';
  } catch (const TrainingAborted& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  }
  return kOk;
}

int cmd_sample(const Globals& g, const std::string& ckpt, const std::string& condition, int count, bool raw,
               std::ostream& out) {
  if (count < 0) throw InvalidArgument("--count must be >= 0");
  const auto model = GenerativeModel::load(ckpt, !raw);
  const ConditionLabel label = parse_condition(condition);
  model.check_label(label);
  if (count == 0) return kOk;
  const DiffusionSchedule sched = build_schedule(model.schedule());
  const fs::path dir = out_dir(g);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(g.seed, static_cast<std::uint64_t>(i)));
    const auto x = model.sample(label, sched, rng);
    char name[32];
    std::snprintf(name, sizeof name, "sample_%04d.cseq", i);
    write_cseq(dir / name, x, json{{"condition", label}, {"index", i}}.dump());
    out << (dir / name).string() << '\n';
  }
  return kOk;
}

int cmd_eval(const Globals& g, const std::string& ckpt, const std::string& data_path, int samples,
             const std::string& estimate, const std::string& truth, std::ostream& out) {
  json report = json::object();
  if (!estimate.empty() || !truth.empty()) {
    if (estimate.empty() || truth.empty()) throw InvalidArgument("--estimate and --truth go together");
    const auto a = read_cseq(estimate).sequence;
    const auto b = read_cseq(truth).sequence;
    if (!a.same_shape(b)) throw InvalidArgument("estimate and truth shapes differ");
    const double snr = snr_db(a, b);
    report["pair"] = {{"ssim", complex_ssim(a, b)}, {"snr_db", std::isinf(snr) ? json("inf") : json(snr)}};
  }
  if (!ckpt.empty() || !data_path.empty()) {
    if (ckpt.empty() || data_path.empty()) throw InvalidArgument("--ckpt and --data go together");
    const auto model = GenerativeModel::load(ckpt);
    const Dataset data = load_dataset(data_path);
    EvalConfig cfg;
    cfg.samples_per_condition = samples;
    cfg.seed = g.seed;
    report["generation"] = json::parse(evaluate(model, data, cfg).to_json());
  }
  if (report.empty()) throw InvalidArgument("eval needs --ckpt/--data or --estimate/--truth");
  out << report.dump(2) << '\n';
  if (!g.out.empty()) {
    std::ofstream f(out_dir(g) / "eval.json");
    f << report.dump(2) << '\n';
  }
  return kOk;
}

int cmd_gen_data(const Globals& g, const std::string& spec_path, std::ostream& out) {
  SyntheticSpec spec = spec_path.empty() ? SyntheticSpec{} : synthetic_spec_from_json(read_file(spec_path));
  if (g.seed_given) spec.seed = g.seed;
  spec.validate();
  const Dataset data = generate(spec);
  int correct = 0;
  for (const auto& e : data) correct += dft_peak_class(e.x, spec) == std::stoi(e.label.at("class"));
  const double accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  const auto index = save_dataset(data, out_dir(g), json{{"spec", json::parse(synthetic_spec_to_json(spec))}}.dump());
  out << json{{"index", index.string()},
              {"sequences", data.size()},
              {"digest", dataset_digest(data)},
              {"oracle_accuracy", accuracy}}
             .dump(2)
      << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-frequency diffusion for complex-valued sequences", "tfdiff"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--verbose,-v", g.verbose, "Verbose output");

  auto* verify = app.add_subcommand("schedule-verify", "Build a schedule and check its convergence conditions");
  std::string dump;
  verify->add_option("--dump", dump, "Write the schedule as JSON");

  auto* destruct = app.add_subcommand("destruct", "Corrupt a sequence to the requested steps");
  std::string input, steps_text;
  bool spectrogram = false;
  destruct->add_option("--input", input, "CSEQ1 input")->required();
  destruct->add_option("--steps", steps_text, "Comma-separated steps, e.g. 0,10,300")->required();
  destruct->add_flag("--spectrogram", spectrogram, "Also write magnitude spectrograms (PGM)");

  auto* trainc = app.add_subcommand("train", "Train a model on a dataset index");
  std::string data_path, resume;
  long long steps = -1;
  trainc->add_option("--data", data_path, "Dataset index.json")->required();
  trainc->add_option("--resume", resume, "Checkpoint to resume from");
  trainc->add_option("--steps", steps, "Override max_steps");

  auto* samplec = app.add_subcommand("sample", "Generate sequences from a checkpoint");
  std::string ckpt, condition;
  int count = 1;
  bool raw = false;
  samplec->add_option("--ckpt", ckpt, "Checkpoint")->required();
  samplec->add_option("--condition", condition, "Condition label k=v,...");
  samplec->add_option("--count", count, "Number of sequences");
  samplec->add_flag("--raw-weights", raw, "Use raw instead of EMA weights");

  auto* evalc = app.add_subcommand("eval", "Score generated sequences or an estimate/truth pair");
  std::string eval_ckpt, eval_data, estimate, truth;
  int samples = 8;
  evalc->add_option("--ckpt", eval_ckpt, "Checkpoint");
  evalc->add_option("--data", eval_data, "Held-out dataset index.json");
  evalc->add_option("--samples", samples, "Samples per condition");
  evalc->add_option("--estimate", estimate, "Estimated sequence (CSEQ1)");
  evalc->add_option("--truth", truth, "Reference sequence (CSEQ1)");

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  std::string spec_path;
  gen->add_option("--spec", spec_path, "Synthetic spec JSON");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  g.seed_given = app.count("--seed") > 0;

  try {
    if (*verify) return cmd_schedule_verify(g, dump, out, err);
    if (*destruct) return cmd_destruct(g, input, steps_text, spectrogram, out);
    if (*trainc) return cmd_train(g, data_path, resume, steps, out, err);
    if (*samplec) return cmd_sample(g, ckpt, condition, count, raw, out);
    if (*evalc) return cmd_eval(g, eval_ckpt, eval_data, samples, estimate, truth, out);
    if (*gen) return cmd_gen_data(g, spec_path, out);
  } catch (const TrainingAborted& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace tfd::cli
