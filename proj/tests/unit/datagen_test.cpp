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

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "tfdiff/datagen.hpp"
#include "tfdiff/error.hpp"

using namespace tfd;
using tfd::testing::temp_dir;

namespace {

double accuracy(const Dataset& data, const SyntheticSpec& spec) {
  int hits = 0;
  for (const auto& e : data) hits += dft_peak_class(e.x, spec) == std::stoi(e.label.at("class"));
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// Unwrapped phase increments along row 0.
std::vector<double> phase_steps(const ComplexSequence& x) {
  std::vector<double> d;
  for (Eigen::Index n = 1; n < x.temporal(); ++n) d.push_back(std::arg(x.values(0, n) * std::conj(x.values(0, n - 1))));
  return d;
}

}  // namespace

TEST_CASE("static channel: one path, no Doppler, negligible noise") {
  SyntheticSpec spec;
  spec.paths = 1;
  spec.doppler = {0.0, 0.0};
  spec.noise_db = -300.0;
  spec.per_class = 3;
  for (const auto& e : gen_multipath_csi(spec)) {
    for (Eigen::Index n = 1; n < e.x.temporal(); ++n) CHECK((e.x.values.col(n) - e.x.values.col(0)).norm() < 1e-12);
  }
}

TEST_CASE("rows carry a per-row delay phase") {
  SyntheticSpec spec;
  spec.paths = 1;
  spec.noise_db = -300.0;
  spec.per_class = 2;
  for (const auto& e : gen_multipath_csi(spec)) {
    const cplx step = e.x.values(1, 0) / e.x.values(0, 0);
    CHECK(std::abs(std::abs(step) - 1.0) < 1e-9);
    for (Eigen::Index m = 2; m < e.x.spatial(); ++m) {
      CHECK(std::abs(e.x.values(m, 5) / e.x.values(m - 1, 5) - step) < 1e-9);
    }
  }
}

TEST_CASE("disjoint Doppler classes are separated by a DFT-peak classifier") {
  SyntheticSpec spec;
  spec.class_count = 2;
  spec.per_class = 100;
  spec.noise_db = -40.0;
  CHECK(accuracy(gen_multipath_csi(spec), spec) == 1.0);
  spec.class_count = 4;
  spec.noise_db = -30.0;
  CHECK(accuracy(gen_multipath_csi(spec), spec) >= 0.99);
  spec.kind = SyntheticKind::kFmcwChirp;
  CHECK(accuracy(gen_fmcw_chirp(spec), spec) >= 0.99);
  spec.class_count = 2;
  spec.noise_db = -40.0;
  CHECK(accuracy(gen_fmcw_chirp(spec), spec) == 1.0);
}

TEST_CASE("fixed seed gives bit-identical data") {
  for (auto kind : {SyntheticKind::kMultipathCsi, SyntheticKind::kFmcwChirp}) {
    SyntheticSpec spec;
    spec.kind = kind;
    spec.per_class = 5;
    const Dataset a = generate(spec), b = generate(spec);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].x.values == b[i].x.values);
      CHECK(a[i].label == b[i].label);
    }
    CHECK(dataset_digest(a) == dataset_digest(b));
    spec.seed = 2;
    CHECK(dataset_digest(generate(spec)) != dataset_digest(a));
  }
}

TEST_CASE("classes are phase-coherent clusters shared across seeds") {
  for (auto kind : {SyntheticKind::kMultipathCsi, SyntheticKind::kFmcwChirp}) {
    SyntheticSpec spec;
    spec.kind = kind;
    spec.per_class = 4;
    const Dataset a = generate(spec);
    spec.seed = 2;
    const Dataset b = generate(spec);
    double same = 0.0, cross = 0.0;
    int ns = 0, nc = 0;
    for (const auto& ea : a) {
      for (const auto& eb : b) {
        const double s = complex_ssim(ea.x, eb.x);
        if (ea.label == eb.label) {
          same += s;
          ++ns;
        } else {
          cross += s;
          ++nc;
        }
      }
    }
    CHECK(same / ns > 0.8);
    CHECK(std::abs(cross / nc) < 0.1);
  }
}

TEST_CASE("zero jitter makes every member of a class identical up to noise") {
  SyntheticSpec spec;
  spec.jitter = 0.0;
  spec.noise_db = -300.0;
  spec.per_class = 3;
  const Dataset d = generate(spec);
  CHECK((d[0].x.values - d[2].x.values).norm() < 1e-9);
  CHECK((d[0].x.values - d[3].x.values).norm() > 1.0);
}

TEST_CASE("zero chirp rate is a pure tone") {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kFmcwChirp;
  spec.chirp_rate = {0.0, 0.0};
  spec.start_freq = {3.0, 3.0};
  spec.noise_db = -300.0;
  spec.per_class = 2;
  const double expected = 2.0 * std::numbers::pi * 3.0 / spec.length;
  for (const auto& e : gen_fmcw_chirp(spec)) {
    for (double d : phase_steps(e.x)) CHECK(std::abs(d - expected) < 1e-9);
  }
}

TEST_CASE("instantaneous frequency grows linearly with slope set by the chirp rate") {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kFmcwChirp;
  spec.noise_db = -300.0;
  spec.start_freq = {0.0, 0.0};
  spec.per_class = 1;
  spec.class_count = 2;
  for (double k : {0.05, 0.1, -0.08}) {
    spec.chirp_rate = {k, k};
    const auto data = gen_fmcw_chirp(spec);
    const auto d = phase_steps(data[0].x);
    // Increments stay inside (-pi, pi] for these rates, so no unwrapping is needed.
    for (std::size_t n = 1; n < d.size(); ++n) {
      CHECK(std::abs((d[n] - d[n - 1]) - 2.0 * std::numbers::pi * k / spec.length) < 1e-9);
    }
  }
}

TEST_CASE("samples are power-normalized") {
  for (const auto& e : generate({})) {
    double mean_norm = 0.0;
    for (Eigen::Index n = 0; n < e.x.temporal(); ++n) mean_norm += e.x.values.col(n).norm();
    CHECK(mean_norm / e.x.temporal() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dataset save and load") {
  SyntheticSpec spec;
  spec.per_class = 3;
  const Dataset data = generate(spec);
  const auto dir = temp_dir("datagen_io");
  const auto index = save_dataset(data, dir, R"({"spec": {"kind": "multipath_csi"}})");
  const Dataset back = load_dataset(index);
  REQUIRE(back.size() == data.size());
  CHECK(dataset_digest(back) == dataset_digest(data));
  CHECK_THROWS_AS(load_dataset(dir / "nope.json"), InvalidArgument);
  const Dataset short_data = preprocess_dataset(data, 32);
  CHECK(short_data[0].x.temporal() == 32);
}

TEST_CASE("spec JSON and validation") {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kFmcwChirp;
  spec.chirp_rate = {-0.2, 0.3};
  spec.seed = 99;
  const SyntheticSpec back = synthetic_spec_from_json(synthetic_spec_to_json(spec));
  CHECK(back.kind == SyntheticKind::kFmcwChirp);
  CHECK(back.chirp_rate.hi == 0.3);
  CHECK(back.seed == 99);
  CHECK_THROWS_AS(synthetic_spec_from_json(R"({"kind": "radar"})"), InvalidArgument);
  CHECK_THROWS_AS(synthetic_spec_from_json(R"({"class_count": 1})"), InvalidArgument);
  CHECK_THROWS_AS(synthetic_spec_from_json(R"({"doppler": [4, -4]})"), InvalidArgument);
  CHECK_THROWS_AS(synthetic_spec_from_json(R"({"guard": 0.5})"), InvalidArgument);
  CHECK_THROWS_AS(synthetic_spec_from_json(R"({"jitter": -0.1})"), InvalidArgument);
  CHECK(synthetic_spec_from_json(R"({"class_seed": 7, "jitter": 0.1})").class_seed == 7);
  CHECK_THROWS_AS(synthetic_spec_from_json("nope"), InvalidArgument);
  CHECK(class_slice({0.0, 4.0}, 1, 4, 0.25).lo == 1.25);
  CHECK(class_slice({0.0, 4.0}, 1, 4, 0.25).hi == 1.75);
}
