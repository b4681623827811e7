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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edgepart/linalg.hpp"

namespace edgepart {

// Internal unit convention is strict SI: bits, Hz, seconds, watts, FLOPs.
// Published tables quote MB / GFLOPs / GHz / ms^2; convert at ingestion.
inline constexpr double kBitsPerMb = 8.0e6;
inline constexpr double kFlopsPerGflop = 1.0e9;
inline constexpr double kHzPerGhz = 1.0e9;
inline constexpr double kS2PerMs2 = 1.0e-6;

/// Statistics of one partition point of a block-chained DNN on one device
/// class. Point m means: blocks 1..m run on the device, the rest on the VM.
struct BlockStats {
  int point = 0;                           // m in 0..M
  double out_data_bits = 0.0;              // data uploaded when cutting at m
  double cum_workload_flops = 0.0;         // device-side work, cumulative
  double throughput_flops_per_cycle = 1.0; // fitted g for the device stage
  double local_var_s2 = 0.0;               // variance of the device stage
  double vm_mean_s = 0.0;                  // mean of the VM stage
  double vm_var_s2 = 0.0;                  // variance of the VM stage
  // Deterministic additive padding of the mean total time. Zero for measured
  // profiles; the worst-case policy solves on a padded, variance-free copy.
  double time_pad_s = 0.0;
  // Empirical (max - mean) margins per stage; absent -> 3*sqrt(var) fallback.
  std::optional<double> wc_local_margin_s;
  std::optional<double> wc_vm_margin_s;
};

/// A DNN profiled on one device class: per-point statistics plus the
/// covariance matrix of the total per-point inference times.
struct DnnProfile {
  std::string name;
  int num_blocks = 0;                   // M; points run 0..M
  std::vector<BlockStats> points;       // size M+1
  Mat covariance_s2;                    // (M+1)x(M+1)
  double default_f_min_hz = 0.0;
  double default_f_max_hz = 0.0;
  double default_kappa_w_per_cps3 = 0.0;
  double vm_throughput_flops_per_s = 5.0e12;
  bool synthetic_vm_stats = true;

  int max_point() const { return num_blocks; }
  const BlockStats& at(int m) const;
  double wc_local_margin(int m) const;
  double wc_vm_margin(int m) const;

  /// Checks every structural invariant; throws ValidationError naming the
  /// first violation.
  void validate() const;
};

/// One mobile device in a scenario.
struct DeviceScenario {
  int id = 0;
  double distance_m = 1.0;
  double channel_gain = 1.0;            // h, linear power ratio
  double tx_power_w = 1.0;              // p
  double noise_psd_w_per_hz = 1.0;      // N0
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
  double kappa_w_per_cps3 = 0.0;        // energy coefficient in kappa*f^3*t
  double deadline_s = 0.0;              // D
  double epsilon = 0.05;                // tolerated violation probability
  std::shared_ptr<const DnnProfile> profile;

  void validate() const;
};

/// Relaxed or binary selection of a partition point per device.
struct PartitionDecision {
  std::vector<Vec> x;  // one row per device, length M+1 of that device

  static PartitionDecision one_hot(const std::vector<DeviceScenario>& devices,
                                   const std::vector<int>& points);

  /// Rows sum to 1 within 1e-9, entries within [0,1] (exactly {0,1} when
  /// binary is requested).
  void validate(bool binary) const;
  bool is_binary(double tol = 1e-9) const;
  /// Argmax of a binary/near-binary row.
  int point_of(int device) const;
};

/// Per-device uplink bandwidth and CPU/GPU frequency.
struct Allocation {
  Vec bandwidth_hz;
  Vec frequency_hz;

  void validate(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz) const;
};

// ---- Pure formulas of the latency / energy model ----

/// log2(1 + p*h / (b*N0)) in bits/s/Hz; throws on b <= 0.
double spectral_efficiency(const DeviceScenario& dev, double bandwidth_hz);

/// Upload time of an arbitrary payload at bandwidth b; d_bits >= 0.
double offload_time_for_bits(const DeviceScenario& dev, double d_bits, double bandwidth_hz);

double offload_time(const DeviceScenario& dev, int m, double bandwidth_hz);
double offload_energy(const DeviceScenario& dev, int m, double bandwidth_hz);

/// Mean device-stage time w/(g*f); f must lie in the device's range.
double expected_local_time(const DeviceScenario& dev, int m, double f_hz);
/// kappa * (w/g) * f^2, the expectation of kappa*f^3*t under the mean model.
double expected_local_energy(const DeviceScenario& dev, int m, double f_hz);

double expected_total_time(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz);
double expected_total_energy(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz);

/// t_off(b) together with its first two derivatives in b, for the solvers.
struct OffloadTimeDerivs {
  double t = 0.0;
  double dt_db = 0.0;
  double d2t_db2 = 0.0;
};
OffloadTimeDerivs offload_time_derivs(const DeviceScenario& dev, double d_bits, double bandwidth_hz);

}  // namespace edgepart
