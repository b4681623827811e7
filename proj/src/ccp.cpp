// Copyright 2026 The Edgepart Authors
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

#include "edgepart/ccp.hpp"

#include <cmath>

#include "edgepart/error.hpp"

namespace edgepart {

double sigma_of(double epsilon) {
  EDGEPART_REQUIRE(epsilon > 0.0 && epsilon < 1.0, ValidationError,
                   "risk level must lie in (0,1)");
  return std::sqrt((1.0 - epsilon) / epsilon);
}

double ecr_bound(const Vec& a, const Vec& mean, const Mat& cov, double epsilon) {
  const int n = static_cast<int>(a.size());
  EDGEPART_REQUIRE(mean.size() == a.size(), ValidationError, "ecr_bound: mean dimension mismatch");
  EDGEPART_REQUIRE(cov.rows() == n && cov.cols() == n, ValidationError,
                   "ecr_bound: covariance dimension mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      EDGEPART_REQUIRE(std::abs(cov(i, j) - cov(j, i)) <= 1e-10 * (1.0 + std::abs(cov(i, j))),
                       ValidationError, "ecr_bound: covariance not symmetric");
  // Measured covariances are noisy; tolerate eigenvalues down to -1e-10 and
  // clamp, reject anything more negative.
  const Vec ev = symmetric_eigenvalues(cov);
  EDGEPART_REQUIRE(ev.empty() || ev.front() >= -1e-10, ValidationError,
                   "ecr_bound: covariance not positive semidefinite");
  double quad = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += cov(i, j) * a[static_cast<size_t>(j)];
    quad += a[static_cast<size_t>(i)] * row;
  }
  quad = std::max(quad, 0.0);
  return dot(a, mean) + sigma_of(epsilon) * std::sqrt(quad);
}

DeadlineTerms deadline_terms(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz) {
  const BlockStats& p = dev.profile->at(m);
  DeadlineTerms out;
  out.mean_part = expected_total_time(dev, m, bandwidth_hz, f_hz);
  out.dispersion_part = sigma_of(dev.epsilon) * std::sqrt(p.local_var_s2 + p.vm_var_s2);
  out.bound = dev.deadline_s;
  return out;
}

double deadline_slack(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz) {
  return deadline_terms(dev, m, bandwidth_hz, f_hz).slack();
}

DeadlineTerms deadline_terms_relaxed(const DeviceScenario& dev, const Vec& x_row,
                                     double bandwidth_hz, double f_hz) {
  const DnnProfile& prof = *dev.profile;
  EDGEPART_REQUIRE(x_row.size() == static_cast<size_t>(prof.max_point()) + 1, ValidationError,
                   "decision row length mismatch");
  double sum = 0.0;
  for (double v : x_row) {
    EDGEPART_REQUIRE(v >= -1e-12 && v <= 1.0 + 1e-12, ValidationError,
                     "decision entry outside [0,1]");
    sum += v;
  }
  EDGEPART_REQUIRE(std::abs(sum - 1.0) <= 1e-9, ValidationError, "decision row must sum to 1");

  DeadlineTerms out;
  double quad = 0.0;
  for (int m = 0; m <= prof.max_point(); ++m) {
    const double xm = x_row[static_cast<size_t>(m)];
    if (xm != 0.0) out.mean_part += xm * expected_total_time(dev, m, bandwidth_hz, f_hz);
    quad += prof.covariance_s2(m, m) * xm * xm;
  }
  out.dispersion_part = sigma_of(dev.epsilon) * std::sqrt(quad);
  out.bound = dev.deadline_s;
  return out;
}

double deadline_slack_relaxed(const DeviceScenario& dev, const Vec& x_row, double bandwidth_hz,
                              double f_hz) {
  return deadline_terms_relaxed(dev, x_row, bandwidth_hz, f_hz).slack();
}

}  // namespace edgepart
