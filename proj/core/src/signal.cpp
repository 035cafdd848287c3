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

#include "tfdiff/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "tfdiff/error.hpp"

namespace tfd {
namespace {

void require_finite(const CMatrix& m, const char* what) {
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite input");
}

// In-place iterative radix-2 FFT, unnormalized. size must be a power of two.
void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      const cplx w = std::polar(1.0, ang * static_cast<double>(k));
      for (std::size_t i = k; i < n; i += len) {
        const cplx u = a[i];
        const cplx v = a[i + half] * w;
        a[i] = u + v;
        a[i + half] = u - v;
      }
    }
  }
}

// Bluestein chirp-z for arbitrary n, unnormalized.
std::vector<cplx> fft_any(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  if (std::has_single_bit(n)) {
    std::vector<cplx> a(x.begin(), x.end());
    fft_pow2(a, inverse);
    return a;
  }
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small.
    const auto k2 = static_cast<double>((k * k) % (2 * n));
    chirp[k] = std::polar(1.0, sign * std::numbers::pi * k2 / static_cast<double>(n));
  }
  const std::size_t m = std::bit_ceil(2 * n - 1);
  std::vector<cplx> a(m, cplx{}), b(m, cplx{});
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);
  std::vector<cplx> out(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * inv_m * chirp[k];
  return out;
}

std::vector<cplx> unitary(std::span<const cplx> x, bool inverse) {
  if (x.empty()) throw InvalidArgument("dft: empty input");
  auto out = fft_any(x, inverse);
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (auto& v : out) v *= scale;
  return out;
}

CMatrix transform_rows(const CMatrix& in, bool inverse) {
  CMatrix out(in.rows(), in.cols());
  std::vector<cplx> row(static_cast<std::size_t>(in.cols()));
  for (Eigen::Index m = 0; m < in.rows(); ++m) {
    for (Eigen::Index n = 0; n < in.cols(); ++n) row[n] = in(m, n);
    const auto r = unitary(row, inverse);
    for (Eigen::Index n = 0; n < in.cols(); ++n) out(m, n) = r[n];
  }
  return out;
}

}  // namespace

std::vector<cplx> dft(std::span<const cplx> x) { return unitary(x, false); }
std::vector<cplx> idft(std::span<const cplx> x) { return unitary(x, true); }

Spectrum dft(const ComplexSequence& x) {
  require_finite(x.values, "dft");
  if (x.temporal() < 1) throw InvalidArgument("dft: N must be >= 1");
  return Spectrum{transform_rows(x.values, false)};
}

ComplexSequence idft(const Spectrum& s) {
  require_finite(s.values, "idft");
  if (s.values.cols() < 1) throw InvalidArgument("idft: N must be >= 1");
  return ComplexSequence(transform_rows(s.values, true));
}

ComplexSequence resample(const ComplexSequence& x, int target_len) {
  if (target_len < 2) throw InvalidArgument("resample: target length must be >= 2");
  const auto n = x.temporal();
  if (n < 2) throw InvalidArgument("resample: input length must be >= 2");
  require_finite(x.values, "resample");
  if (n == target_len) return x;
  CMatrix out(x.spatial(), target_len);
  const double step = static_cast<double>(n - 1) / static_cast<double>(target_len - 1);
  for (int i = 0; i < target_len; ++i) {
    const double pos = step * i;
    auto j = static_cast<Eigen::Index>(std::floor(pos));
    if (j >= n - 1) {
      out.col(i) = x.values.col(n - 1);
      continue;
    }
    const double frac = pos - static_cast<double>(j);
    out.col(i) = (1.0 - frac) * x.values.col(j) + frac * x.values.col(j + 1);
  }
  return ComplexSequence(std::move(out));
}

ComplexSequence normalize_power(const ComplexSequence& x) {
  require_finite(x.values, "normalize_power");
  if (x.temporal() < 1 || x.spatial() < 1) throw InvalidArgument("normalize_power: empty input");
  double mean_norm = 0.0;
  for (Eigen::Index n = 0; n < x.temporal(); ++n) mean_norm += x.values.col(n).norm();
  mean_norm /= static_cast<double>(x.temporal());
  if (!(mean_norm > 0.0)) throw InvalidArgument("normalize_power: all-zero input");
  return ComplexSequence(x.values / mean_norm);
}

ComplexSequence preprocess(const ComplexSequence& x, int target_len) {
  return normalize_power(resample(x, target_len));
}

double complex_ssim(const ComplexSequence& a, const ComplexSequence& b,
                    const SsimOptions& options) {
  if (!a.same_shape(b)) throw InvalidArgument("complex_ssim: shape mismatch");
  if (a.values.size() == 0) throw InvalidArgument("complex_ssim: empty input");
  if (options.window < 1 || options.stride < 1) {
    throw InvalidArgument("complex_ssim: window and stride must be positive");
  }
  require_finite(a.values, "complex_ssim");
  require_finite(b.values, "complex_ssim");

  const double peak = std::max(a.values.cwiseAbs().maxCoeff(), b.values.cwiseAbs().maxCoeff());
  const double c1 = (options.k1 * peak) * (options.k1 * peak);
  const double c2 = (options.k2 * peak) * (options.k2 * peak);
  if (c1 == 0.0) return 1.0;  // both inputs identically zero

  const auto n = a.temporal();
  const auto w = std::min<Eigen::Index>(options.window, n);
  double total = 0.0;
  int windows = 0;
  for (Eigen::Index start = 0; start + w <= n; start += options.stride) {
    const auto wa = a.values.middleCols(start, w);
    const auto wb = b.values.middleCols(start, w);
    const double count = static_cast<double>(wa.size());
    const cplx mu_a = wa.sum() / count;
    const cplx mu_b = wb.sum() / count;
    const auto da = (wa.array() - mu_a).eval();
    const auto db = (wb.array() - mu_b).eval();
    const double var_a = da.abs2().sum() / count;
    const double var_b = db.abs2().sum() / count;
    const double cov = (da * db.conjugate()).sum().real() / count;
    const double lum = (2.0 * std::abs(mu_a) * std::abs(mu_b) + c1) /
                       (std::norm(mu_a) + std::norm(mu_b) + c1);
    const double structure = (2.0 * cov + c2) / (var_a + var_b + c2);
    total += lum * structure;
    ++windows;
  }
  return total / windows;
}

double snr_db(const ComplexSequence& estimate, const ComplexSequence& truth) {
  if (!estimate.same_shape(truth)) throw InvalidArgument("snr_db: shape mismatch");
  const double power = truth.values.squaredNorm();
  if (!(power > 0.0)) throw InvalidArgument("snr_db: zero truth");
  const double residual = (truth.values - estimate.values).squaredNorm();
  if (residual == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(power / residual);
}

}  // namespace tfd
