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

#include "tfdiff/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "json_util.hpp"
#include "tfdiff/cseq_io.hpp"
#include "tfdiff/error.hpp"
#include "tfdiff/rng.hpp"

namespace tfd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool ordered(const Range& r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi; }

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

void read_range(const json& j, const char* key, Range& r) {
  if (auto it = j.find(key); it != j.end()) {
    const auto v = it->get<std::vector<double>>();
    if (v.size() != 2) throw InvalidArgument(std::string("spec: '") + key + "' must be [lo, hi]");
    r = {v[0], v[1]};
  }
}

double draw(Rng& rng, const Range& r) { return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi); }

double width(const Range& r) { return r.hi - r.lo; }

// centre moved uniformly by up to `half` either way
double around(Rng& rng, double centre, double half) {
  return half == 0.0 ? centre : centre + rng.uniform(-half, half);
}

Rng class_rng(const SyntheticSpec& spec, int c) {
  // the last stream index is never an item index
  return Rng(derive_seed(spec.class_seed, static_cast<std::uint64_t>(c), ~std::uint64_t{0}));
}

void add_noise(CMatrix& x, double noise_db, Rng& rng) {
  const double power = x.squaredNorm() / static_cast<double>(x.size());
  const double sd = std::sqrt(power * std::pow(10.0, noise_db / 10.0));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) += sd * rng.complex_normal();
  }
}

ConditionLabel class_label(int c) { return {{"class", std::to_string(c)}}; }

int peak_bin(const std::vector<cplx>& spec) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (std::norm(spec[k]) > std::norm(spec[best])) best = k;
  }
  const int n = static_cast<int>(spec.size());
  const int k = static_cast<int>(best);
  return k > n / 2 ? k - n : k;  // signed bin
}

std::vector<cplx> row(const ComplexSequence& x, Eigen::Index r) {
  std::vector<cplx> out(static_cast<std::size_t>(x.temporal()));
  for (Eigen::Index n = 0; n < x.temporal(); ++n) out[static_cast<std::size_t>(n)] = x.values(r, n);
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (class_count < 2) throw InvalidArgument("spec: class_count must be >= 2");
  if (per_class < 1) throw InvalidArgument("spec: per_class must be >= 1");
  if (spatial < 1 || length < 2) throw InvalidArgument("spec: need spatial >= 1 and length >= 2");
  if (!std::isfinite(noise_db)) throw InvalidArgument("spec: noise_db must be finite");
  if (!(guard >= 0.0 && guard < 0.5)) throw InvalidArgument("spec: guard must be in [0, 0.5)");
  if (!(jitter >= 0.0 && jitter <= 0.5)) throw InvalidArgument("spec: jitter must be in [0, 0.5]");
  if (kind == SyntheticKind::kMultipathCsi) {
    if (paths < 1) throw InvalidArgument("spec: paths must be >= 1");
    if (!ordered(delay) || !ordered(doppler)) throw InvalidArgument("spec: delay and doppler ranges must be ordered");
    if (!ordered(amplitude) || amplitude.hi <= 0.0) throw InvalidArgument("spec: bad amplitude range");
  } else {
    if (!ordered(chirp_rate)) throw InvalidArgument("spec: chirp_rate range must be ordered");
    if (!ordered(start_freq)) throw InvalidArgument("spec: bad start_freq range");
  }
}

std::string synthetic_spec_to_json(const SyntheticSpec& s) {
  return json{{"kind", s.kind == SyntheticKind::kMultipathCsi ? "multipath_csi" : "fmcw_chirp"},
              {"class_count", s.class_count},
              {"per_class", s.per_class},
              {"spatial", s.spatial},
              {"length", s.length},
              {"seed", s.seed},
              {"class_seed", s.class_seed},
              {"jitter", s.jitter},
              {"noise_db", s.noise_db},
              {"paths", s.paths},
              {"delay", range_json(s.delay)},
              {"doppler", range_json(s.doppler)},
              {"amplitude", range_json(s.amplitude)},
              {"guard", s.guard},
              {"chirp_rate", range_json(s.chirp_rate)},
              {"start_freq", range_json(s.start_freq)}}
      .dump(2);
}

SyntheticSpec synthetic_spec_from_json(const std::string& text) {
  const auto j = parse_json(text, "spec");
  if (!j.is_object()) throw InvalidArgument("spec: expected a JSON object");
  SyntheticSpec s;
  try {
    if (j.contains("kind")) {
      const auto k = j.at("kind").get<std::string>();
      if (k == "multipath_csi") {
        s.kind = SyntheticKind::kMultipathCsi;
      } else if (k == "fmcw_chirp") {
        s.kind = SyntheticKind::kFmcwChirp;
      } else {
        throw InvalidArgument("spec: unknown kind '" + k + "'");
      }
    }
    read_opt(j, "class_count", s.class_count);
    read_opt(j, "per_class", s.per_class);
    read_opt(j, "spatial", s.spatial);
    read_opt(j, "length", s.length);
    read_opt(j, "seed", s.seed);
    read_opt(j, "class_seed", s.class_seed);
    read_opt(j, "jitter", s.jitter);
    read_opt(j, "noise_db", s.noise_db);
    read_opt(j, "paths", s.paths);
    read_range(j, "delay", s.delay);
    read_range(j, "doppler", s.doppler);
    read_range(j, "amplitude", s.amplitude);
    read_opt(j, "guard", s.guard);
    read_range(j, "chirp_rate", s.chirp_rate);
    read_range(j, "start_freq", s.start_freq);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("spec: ") + e.what());
  }
  s.validate();
  return s;
}

Range class_slice(const Range& r, int c, int class_count, double guard) {
  const double w = (r.hi - r.lo) / class_count;
  return {r.lo + (c + guard) * w, r.lo + (c + 1 - guard) * w};
}

Dataset gen_multipath_csi(const SyntheticSpec& spec) {
  spec.validate();
  struct Path {
    double a, f, tau, phi;
  };
  Dataset out;
  const double n_len = spec.length;
  for (int c = 0; c < spec.class_count; ++c) {
    const Range dop = class_slice(spec.doppler, c, spec.class_count, spec.guard);
    const Range del = class_slice(spec.delay, c, spec.class_count, spec.guard);
    Rng crng = class_rng(spec, c);
    std::vector<Path> centre(static_cast<std::size_t>(spec.paths));
    for (auto& p : centre) p = {draw(crng, spec.amplitude), draw(crng, dop), draw(crng, del), crng.uniform()};
    for (int i = 0; i < spec.per_class; ++i) {
      Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)));
      CMatrix x = CMatrix::Zero(spec.spatial, spec.length);
      for (const auto& pc : centre) {
        const double a = around(rng, pc.a, spec.jitter * width(spec.amplitude));
        const double f = around(rng, pc.f, spec.jitter * width(dop));
        const double tau = around(rng, pc.tau, spec.jitter * width(del));
        const double phi = around(rng, pc.phi, spec.jitter);
        for (int m = 0; m < spec.spatial; ++m) {
          for (int n = 0; n < spec.length; ++n) {
            const double ph = kTwoPi * (f * n / n_len + phi - tau * m / spec.spatial);
            x(m, n) += a * cplx{std::cos(ph), std::sin(ph)};
          }
        }
      }
      add_noise(x, spec.noise_db, rng);
      out.push_back({normalize_power(ComplexSequence(std::move(x))), class_label(c)});
    }
  }
  return out;
}

Dataset gen_fmcw_chirp(const SyntheticSpec& spec) {
  spec.validate();
  Dataset out;
  const double n_len = spec.length;
  for (int c = 0; c < spec.class_count; ++c) {
    const Range rate = class_slice(spec.chirp_rate, c, spec.class_count, spec.guard);
    const Range freq = class_slice(spec.start_freq, c, spec.class_count, spec.guard);
    Rng crng = class_rng(spec, c);
    const double k_c = draw(crng, rate);
    const double f0_c = draw(crng, freq);
    const double spacing_c = crng.uniform();  // per-row phase progression
    for (int i = 0; i < spec.per_class; ++i) {
      Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)));
      const double k = around(rng, k_c, spec.jitter * width(rate));
      const double f0 = around(rng, f0_c, spec.jitter * width(freq));
      const double spacing = around(rng, spacing_c, spec.jitter);
      CMatrix x(spec.spatial, spec.length);
      for (int m = 0; m < spec.spatial; ++m) {
        for (int n = 0; n < spec.length; ++n) {
          const double ph = std::numbers::pi * k * n * n / n_len + kTwoPi * (f0 * n / n_len + spacing * m);
          x(m, n) = {std::cos(ph), std::sin(ph)};
        }
      }
      add_noise(x, spec.noise_db, rng);
      out.push_back({normalize_power(ComplexSequence(std::move(x))), class_label(c)});
    }
  }
  return out;
}

Dataset generate(const SyntheticSpec& spec) {
  return spec.kind == SyntheticKind::kMultipathCsi ? gen_multipath_csi(spec) : gen_fmcw_chirp(spec);
}

Dataset preprocess_dataset(const Dataset& data, int length) {
  Dataset out;
  out.reserve(data.size());
  for (const auto& e : data) out.push_back({preprocess(e.x, length), e.label});
  return out;
}

std::filesystem::path save_dataset(const Dataset& data, const std::filesystem::path& dir,
                                   const std::string& extra_json) {
  std::filesystem::create_directories(dir);
  json items = json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seq_%05zu.cseq", i);
    const json meta{{"condition", data[i].label}};
    write_cseq(dir / name, data[i].x, meta.dump());
    items.push_back({{"path", name}, {"condition", data[i].label}});
  }
  json index{{"items", items}};
  const auto extra = parse_json(extra_json, "index extra");
  for (const auto& [k, v] : extra.items()) index[k] = v;
  const auto path = dir / "index.json";
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  f << index.dump(2) << '\n';
  return path;
}

Dataset load_dataset(const std::filesystem::path& index_path) {
  std::ifstream f(index_path);
  if (!f) throw InvalidArgument("cannot read dataset index " + index_path.string());
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto j = parse_json(text, "dataset index");
  Dataset out;
  try {
    for (const auto& item : j.at("items")) {
      const auto rec = read_cseq(index_path.parent_path() / item.at("path").get<std::string>());
      ConditionLabel label;
      if (item.contains("condition")) label = item.at("condition").get<ConditionLabel>();
      out.push_back({rec.sequence, std::move(label)});
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("dataset index: ") + e.what());
  }
  return out;
}

std::string dataset_digest(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char ch : bytes) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& e : data) {
    mix(encode_cseq(e.x, json(e.label).dump(), SampleType::kFloat64));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int dft_peak_class(const ComplexSequence& x, const SyntheticSpec& spec) {
  const int n = static_cast<int>(x.temporal());
  if (spec.kind == SyntheticKind::kMultipathCsi) {
    const int k = peak_bin(dft(row(x, 0)));
    const double w = (spec.doppler.hi - spec.doppler.lo) / spec.class_count;
    const int c = static_cast<int>(std::floor((k - spec.doppler.lo) / w));
    return std::clamp(c, 0, spec.class_count - 1);
  }
  int best = 0;
  double best_peak = -1.0;
  const auto r = row(x, 0);
  for (int c = 0; c < spec.class_count; ++c) {
    const Range s = class_slice(spec.chirp_rate, c, spec.class_count, 0.0);
    const double k = 0.5 * (s.lo + s.hi);
    std::vector<cplx> d(r.size());
    for (int i = 0; i < n; ++i) {
      const double ph = -std::numbers::pi * k * i * i / n;
      d[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] * cplx{std::cos(ph), std::sin(ph)};
    }
    double peak = 0.0;
    for (const auto& v : dft(d)) peak = std::max(peak, std::abs(v));
    if (peak > best_peak) {
      best_peak = peak;
      best = c;
    }
  }
  return best;
}

}  // namespace tfd
