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

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "edgepart/fixtures.hpp"
#include "edgepart/model.hpp"
#include "edgepart/profile_io.hpp"

namespace testutil {

/// Small synthetic profile: 2 blocks, 3 points, round numbers.
inline edgepart::DnnProfile toy_profile(double v1_ms2 = 20.0, double v2_ms2 = 40.0) {
  using namespace edgepart;
  DnnProfile p;
  p.name = "toy";
  p.num_blocks = 2;
  const double d_mb[] = {1.0, 0.3, 0.001};
  const double w_gf[] = {0.0, 0.5, 1.0};
  const double g[] = {1.0, 10.0, 10.0};
  const double v_ms2[] = {0.0, v1_ms2, v2_ms2};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int m = 0; m <= 2; ++m) {
    BlockStats b;
    b.point = m;
    b.out_data_bits = d_mb[m] * kBitsPerMb;
    b.cum_workload_flops = w_gf[m] * kFlopsPerGflop;
    b.throughput_flops_per_cycle = g[m];
    b.local_var_s2 = v_ms2[m] * kS2PerMs2;
    b.vm_mean_s = nan;
    b.vm_var_s2 = nan;
    p.points.push_back(b);
  }
  p.default_f_min_hz = 1e8;
  p.default_f_max_hz = 1.2e9;
  p.default_kappa_w_per_cps3 = 0.8e-27;
  apply_default_vm_stats(p);
  apply_diagonal_covariance(p);
  p.validate();
  return p;
}

/// Device at 100 m (h = 10^-9.8), 1 W, -174 dBm/Hz, AlexNet-class bounds.
inline edgepart::DeviceScenario make_device(std::shared_ptr<const edgepart::DnnProfile> profile,
                                            double deadline_s, double epsilon,
                                            double distance_m = 100.0, int id = 0) {
  edgepart::DeviceScenario dev;
  dev.id = id;
  dev.distance_m = distance_m;
  dev.channel_gain = std::pow(10.0, -(38.0 + 30.0 * std::log10(distance_m)) / 10.0);
  dev.tx_power_w = 1.0;
  dev.noise_psd_w_per_hz = std::pow(10.0, -20.4);
  dev.f_min_hz = profile->default_f_min_hz;
  dev.f_max_hz = profile->default_f_max_hz;
  dev.kappa_w_per_cps3 = profile->default_kappa_w_per_cps3;
  dev.deadline_s = deadline_s;
  dev.epsilon = epsilon;
  dev.profile = std::move(profile);
  return dev;
}

inline edgepart::DeviceScenario alexnet_device(double deadline_s, double epsilon,
                                               double distance_m = 100.0, int id = 0) {
  return make_device(edgepart::builtin_profile("alexnet_xavier_nx_cpu"), deadline_s, epsilon,
                     distance_m, id);
}

}  // namespace testutil
