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

#include "tfdiff/cseq_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tfdiff/error.hpp"

namespace tfd {
namespace {

constexpr char kMagic[6] = {'C', 'S', 'E', 'Q', '1', '\0'};

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    need(sizeof(T));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw InvalidArgument("CSEQ1: truncated file");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_cseq(const ComplexSequence& x, std::string_view metadata_json, SampleType type) {
  if (!x.is_finite()) throw InvalidArgument("CSEQ1: non-finite samples");
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.spatial()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.temporal()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(type));
  for (Eigen::Index m = 0; m < x.spatial(); ++m) {
    for (Eigen::Index n = 0; n < x.temporal(); ++n) {
      const cplx v = x.values(m, n);
      if (type == SampleType::kFloat32) {
        put_le<float>(out, static_cast<float>(v.real()));
        put_le<float>(out, static_cast<float>(v.imag()));
      } else {
        put_le<double>(out, v.real());
        put_le<double>(out, v.imag());
      }
    }
  }
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(metadata_json.size()));
  out.append(metadata_json);
  return out;
}

CseqRecord decode_cseq(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw InvalidArgument("CSEQ1: bad magic");
  }
  const auto rows = r.get_le<std::uint32_t>();
  const auto cols = r.get_le<std::uint32_t>();
  const auto tag = r.get_le<std::uint8_t>();
  if (rows == 0 || cols == 0) throw InvalidArgument("CSEQ1: empty shape");
  if (tag > 1) throw InvalidArgument("CSEQ1: unknown dtype tag " + std::to_string(tag));
  CMatrix values(rows, cols);
  for (std::uint32_t m = 0; m < rows; ++m) {
    for (std::uint32_t n = 0; n < cols; ++n) {
      if (tag == 0) {
        const float re = r.get_le<float>();
        const float im = r.get_le<float>();
        values(m, n) = {re, im};
      } else {
        const double re = r.get_le<double>();
        const double im = r.get_le<double>();
        values(m, n) = {re, im};
      }
    }
  }
  const auto meta_len = r.get_le<std::uint32_t>();
  CseqRecord rec{ComplexSequence(std::move(values)), std::string(r.take(meta_len))};
  if (!r.at_end()) throw InvalidArgument("CSEQ1: trailing bytes");
  if (!rec.sequence.is_finite()) throw InvalidArgument("CSEQ1: non-finite samples");
  return rec;
}

void write_cseq(const std::filesystem::path& path, const ComplexSequence& x,
                std::string_view metadata_json, SampleType type) {
  const auto bytes = encode_cseq(x, metadata_json, type);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing " + path.string());
}

CseqRecord read_cseq(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_cseq(bytes);
}

}  // namespace tfd
