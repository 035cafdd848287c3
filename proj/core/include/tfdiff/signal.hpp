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

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tfd {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Sequence length applied on ingestion.
inline constexpr int kCanonicalLength = 512;

/// An M x N block of complex samples: M spatial rows, N temporal columns.
struct ComplexSequence {
  CMatrix values;

  ComplexSequence() = default;
  explicit ComplexSequence(CMatrix v) : values(std::move(v)) {}

  static ComplexSequence zeros(Eigen::Index spatial, Eigen::Index temporal) {
    return ComplexSequence(CMatrix::Zero(spatial, temporal));
  }

  Eigen::Index spatial() const { return values.rows(); }
  Eigen::Index temporal() const { return values.cols(); }
  bool is_finite() const { return values.allFinite(); }
  bool same_shape(const ComplexSequence& o) const {
    return spatial() == o.spatial() && temporal() == o.temporal();
  }
};

/// Temporal-axis spectrum of a ComplexSequence; column 0 is DC.
struct Spectrum {
  CMatrix values;
};

/// Unitary DFT of one vector (scaled by 1/sqrt(N)); any N >= 1.
std::vector<cplx> dft(std::span<const cplx> x);
/// Exact inverse of dft(std::span).
std::vector<cplx> idft(std::span<const cplx> x);

/// Unitary DFT along the temporal axis of every spatial row.
Spectrum dft(const ComplexSequence& x);
ComplexSequence idft(const Spectrum& s);

/// Linear interpolation (or decimation) of the temporal axis to target_len.
ComplexSequence resample(const ComplexSequence& x, int target_len);

/// Divides every sample by the mean L2 norm of the temporal columns.
ComplexSequence normalize_power(const ComplexSequence& x);

/// resample to target_len followed by normalize_power.
ComplexSequence preprocess(const ComplexSequence& x, int target_len = kCanonicalLength);

struct SsimOptions {
  int window = 8;  // temporal samples per window; a window spans all rows
  int stride = 4;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Structural similarity for complex sequences, in [-1, 1].
///
/// Per window: complex means mu_a, mu_b; variances E|a - mu_a|^2; covariance
/// Re E[(a - mu_a) conj(b - mu_b)]. The luminance factor uses the mean
/// magnitudes, so a global phase flip shows up as negative structure only.
/// C1 = (k1 L)^2, C2 = (k2 L)^2 with L the largest modulus over both inputs.
double complex_ssim(const ComplexSequence& a, const ComplexSequence& b,
                    const SsimOptions& options = {});

/// -10 log10(|truth - estimate|^2 / |truth|^2); +inf when they are equal.
double snr_db(const ComplexSequence& estimate, const ComplexSequence& truth);

}  // namespace tfd
