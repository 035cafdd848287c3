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
#include <string_view>

#include "tfdiff/signal.hpp"

namespace tfd {

/// Sample encoding tag of a CSEQ1 file.
enum class SampleType : std::uint8_t { kFloat32 = 0, kFloat64 = 1 };

/// Decoded CSEQ1 payload.
struct CseqRecord {
  ComplexSequence sequence;
  std::string metadata_json = "{}";
};

// CSEQ1 layout, all integers little-endian:
//   "CSEQ1\0" | u32 M | u32 N | u8 dtype | M*N (re, im) pairs, row-major,
//   temporal axis fastest | u32 byte length | UTF-8 JSON metadata
std::string encode_cseq(const ComplexSequence& x, std::string_view metadata_json = "{}",
                        SampleType type = SampleType::kFloat64);
CseqRecord decode_cseq(std::string_view bytes);

void write_cseq(const std::filesystem::path& path, const ComplexSequence& x,
                std::string_view metadata_json = "{}", SampleType type = SampleType::kFloat64);
CseqRecord read_cseq(const std::filesystem::path& path);

}  // namespace tfd
