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
#include <string>
#include <utility>
#include <vector>

#include "tfdiff/condition.hpp"
#include "tfdiff/signal.hpp"

namespace tfd {

struct Example {
  ComplexSequence x;
  ConditionLabel label;
};

using Dataset = std::vector<Example>;

enum class SyntheticKind { kMultipathCsi, kFmcwChirp };

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Parameters of a synthetic corpus. Class c draws a cluster centre from the
/// c-th of class_count equal slices of each class-dependent range, shrunk on
/// both sides by `guard` times the slice width. Centres and per-path phases
/// come from class_seed alone, so corpora with different seeds share their
/// clusters. Each sequence moves every centre by up to `jitter` times the
/// slice width, and every phase by up to `jitter` cycles.
struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kMultipathCsi;
  int class_count = 4;
  int per_class = 64;
  int spatial = 8;
  int length = 64;
  std::uint64_t seed = 1;
  std::uint64_t class_seed = 0;
  double jitter = 0.02;
  double noise_db = -30.0;  // noise power relative to mean signal power per entry

  // multipath
  int paths = 3;
  Range delay{0.0, 4.0};       // samples across the spatial rows; class-dependent
  Range doppler{-16.0, 16.0};  // cycles per sequence; class-dependent
  Range amplitude{0.5, 1.0};
  double guard = 0.25;

  // chirp
  Range chirp_rate{-0.4, 0.4};   // frequency sweep over the sequence, cycles/sample; class-dependent
  Range start_freq{-4.0, 4.0};    // cycles per sequence; class-dependent

  void validate() const;
};

std::string synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const std::string& text);

/// Slice of `r` owned by class c, shrunk by the guard.
Range class_slice(const Range& r, int c, int class_count, double guard);

Dataset gen_multipath_csi(const SyntheticSpec& spec);
Dataset gen_fmcw_chirp(const SyntheticSpec& spec);
Dataset generate(const SyntheticSpec& spec);

/// Power-normalizes and resamples every sequence to `length`.
Dataset preprocess_dataset(const Dataset& data, int length);

/// Writes seq_XXXXX.cseq files and index.json into dir; returns the index path.
std::filesystem::path save_dataset(const Dataset& data, const std::filesystem::path& dir,
                                   const std::string& extra_json = "{}");
/// Loads an index.json and the files it names (paths relative to the index).
Dataset load_dataset(const std::filesystem::path& index_path);

/// FNV-1a over the encoded sequences and labels, as 16 hex digits.
std::string dataset_digest(const Dataset& data);

/// Class predicted from the temporal DFT peak of spatial row 0. For
/// multipath data the peak bin is mapped through the Doppler slices; for
/// chirps the row is dechirped at each class's centre rate and the class
/// with the tallest peak wins.
int dft_peak_class(const ComplexSequence& x, const SyntheticSpec& spec);

}  // namespace tfd
