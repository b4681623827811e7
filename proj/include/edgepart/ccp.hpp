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

#pragma once

#include "edgepart/linalg.hpp"
#include "edgepart/model.hpp"

namespace edgepart {

/// sqrt((1-eps)/eps): the multiplier that turns a mean/variance pair into a
/// distribution-free deadline bound. Throws unless 0 < eps < 1.
double sigma_of(double epsilon);

/// Risk level together with its dispersion multiplier.
struct RiskCoefficient {
  double epsilon = 0.0;
  double sigma = 0.0;
  explicit RiskCoefficient(double eps) : epsilon(eps), sigma(sigma_of(eps)) {}
};

/// a^T mean + sigma(eps) * sqrt(a^T cov a). The chance constraint
/// P{a^T lambda <= z} >= 1-eps holds for every distribution with the given
/// first two moments iff this bound is <= z. cov must be symmetric PSD
/// (eigenvalues >= -1e-10 tolerated and clamped).
double ecr_bound(const Vec& a, const Vec& mean, const Mat& cov, double epsilon);

/// Split of a deterministic deadline constraint: feasible iff
/// mean_part + dispersion_part <= bound.
struct DeadlineTerms {
  double mean_part = 0.0;        // sum of stage means (s)
  double dispersion_part = 0.0;  // sigma * sqrt(variance aggregate) (s)
  double bound = 0.0;            // D (s)
  double slack() const { return bound - mean_part - dispersion_part; }
};

/// Per chosen point: D - [w/(g f) + d/(b eta) + t_vm + sigma*sqrt(v_loc+v_vm)].
DeadlineTerms deadline_terms(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz);
double deadline_slack(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz);

/// Relaxed decision row: D - [sum_m x_m t_m + sigma*sqrt(sum_m W_mm x_m^2)].
DeadlineTerms deadline_terms_relaxed(const DeviceScenario& dev, const Vec& x_row,
                                     double bandwidth_hz, double f_hz);
double deadline_slack_relaxed(const DeviceScenario& dev, const Vec& x_row, double bandwidth_hz,
                              double f_hz);

}  // namespace edgepart
