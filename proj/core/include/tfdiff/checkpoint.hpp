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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tfdiff/signal.hpp"

namespace tfd {

/// Versioned binary checkpoint:
///   "TFDCKPT\0", u32 version, i64 step,
///   three length-prefixed UTF-8 blobs (config JSON, manifest JSON, state JSON),
///   u32 tensor count, then per tensor: length-prefixed name, u32 rows,
///   u32 cols, rows*cols (re, im) float64 pairs in column-major order.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  long long step = 0;
  std::string config_json = "{}";
  std::string manifest_json = "{}";
  std::string state_json = "{}";
  std::vector<std::pair<std::string, CMatrix>> tensors;

  const CMatrix* find(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace tfd
