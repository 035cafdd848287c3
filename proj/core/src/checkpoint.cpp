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

#include "tfdiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tfdiff/error.hpp"

namespace tfd {

namespace {

constexpr char kMagic[8] = {'T', 'F', 'D', 'C', 'K', 'P', 'T', '\0'};

template <typename U>
void put(std::string& out, U bits) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

void put_blob(std::string& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string blob() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(b_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::string_view raw(std::size_t n) {
    need(n);
    auto v = b_.substr(pos_, n);
    pos_ += n;
    return v;
  }

  bool at_end() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw InvalidArgument("checkpoint: truncated file");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

}  // namespace

const CMatrix* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

std::string encode_checkpoint(const Checkpoint& c) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, Checkpoint::kVersion);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(c.step));
  put_blob(out, c.config_json);
  put_blob(out, c.manifest_json);
  put_blob(out, c.state_json);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& [name, t] : c.tensors) {
    put_blob(out, name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.cols()));
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(t(k).real()));
      put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(t(k).imag()));
    }
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw InvalidArgument("checkpoint: bad magic");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw InvalidArgument("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint c;
  c.step = static_cast<long long>(r.get<std::uint64_t>());
  c.config_json = r.blob();
  c.manifest_json = r.blob();
  c.state_json = r.blob();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.blob();
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    CMatrix t(rows, cols);
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      const double re = std::bit_cast<double>(r.get<std::uint64_t>());
      const double im = std::bit_cast<double>(r.get<std::uint64_t>());
      t(k) = {re, im};
    }
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (!r.at_end()) throw InvalidArgument("checkpoint: trailing bytes");
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidArgument("cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw InvalidArgument("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace tfd
