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

#include <map>
#include <string>
#include <vector>

namespace edgepart {

/// Frequency-indexed timing samples of the device-side inference stage.
/// cells[m][f] holds the observed times (seconds) of partition point m at
/// CPU/GPU frequency f (Hz).
struct TimingTrace {
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
  std::map<int, std::map<double, std::vector<double>>> cells;

  void add(int point, double freq_hz, double sample_s) {
    cells[point][freq_hz].push_back(sample_s);
  }
  /// Frequencies recorded for a point, ascending.
  std::vector<double> frequencies(int point) const;
  /// Bounds and basic shape checks; variance preconditions are checked by the
  /// estimators themselves (fitting tolerates single-sample cells).
  void validate() const;
};

struct ThroughputFit {
  double g = 0.0;            // FLOPs per cycle
  double residual_sq = 0.0;  // squared 2-norm of the fit residual (s^2)
};

/// Least-squares fit of t = w/(g*f) over all samples of one point, solved by
/// golden-section search on g (the objective is unimodal for positive data).
ThroughputFit fit_throughput(const TimingTrace& trace, int point, double workload_flops);

/// Mean over frequencies of the per-frequency unbiased sample variance.
double estimate_variance(const TimingTrace& trace, int point);

/// Mean over frequencies of the per-frequency sample covariance between two
/// points; samples must be paired per frequency.
double estimate_covariance(const TimingTrace& trace, int point_a, int point_b);

/// Max over frequencies instead of mean; the conservative variant.
double max_variance_variant(const TimingTrace& trace, int point);

/// CSV with header `point,freq_hz,sample_s`.
TimingTrace load_trace_csv(const std::string& path, double f_min_hz, double f_max_hz);
void save_trace_csv(const TimingTrace& trace, const std::string& path);

}  // namespace edgepart
