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

#include "tfdiff/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "tfdiff/error.hpp"

namespace tfd {

double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

namespace {

// Degenerate zero-variance samples: the sign of the mean decides.
double upper_tail(double stat, double dof) {
  if (std::isinf(stat)) return stat > 0 ? 0.0 : 1.0;
  if (std::isnan(stat)) return 1.0;
  boost::math::students_t dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double ratio(double num, double se) {
  if (se > 0.0) return num / se;
  if (num > 0.0) return std::numeric_limits<double>::infinity();
  if (num < 0.0) return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

TTest paired_t_test_greater(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("t-test: paired samples differ in size");
  if (a.size() < 2) throw InvalidArgument("t-test: need at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TTest r;
  r.n = d.size();
  r.dof = static_cast<double>(r.n - 1);
  r.mean_difference = mean(d);
  r.statistic = ratio(r.mean_difference, std::sqrt(sample_variance(d) / static_cast<double>(r.n)));
  r.p_value = upper_tail(r.statistic, r.dof);
  return r;
}

TTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("t-test: need at least two values per sample");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na, vb = sample_variance(b) / nb;
  TTest r;
  r.n = a.size() + b.size();
  r.mean_difference = mean(a) - mean(b);
  const double se2 = va + vb;
  r.dof = se2 > 0.0 ? se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0)) : na + nb - 2.0;
  r.statistic = ratio(r.mean_difference, std::sqrt(se2));
  if (std::isnan(r.statistic)) {
    r.p_value = 1.0;
  } else {
    r.p_value = std::min(1.0, 2.0 * upper_tail(std::abs(r.statistic), r.dof));
  }
  return r;
}

}  // namespace tfd
