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

#include <cmath>

#include "doctest.h"
#include "edgepart/error.hpp"
#include "edgepart/fixtures.hpp"
#include "edgepart/model.hpp"
#include "testutil.hpp"

using namespace edgepart;

TEST_CASE("spectral efficiency matches the closed form") {
  DeviceScenario dev = testutil::alexnet_device(0.2, 0.05, 100.0);
  // h = 10^-9.8 at 100 m, N0 = 10^-20.4 -> snr = 10^4.6 at 1 MHz
  const double eta = spectral_efficiency(dev, 1e6);
  const double want = std::log2(1.0 + std::pow(10.0, 4.6));
  CHECK(eta == doctest::Approx(want).epsilon(1e-12));
  CHECK(eta == doctest::Approx(15.281).epsilon(1e-4));

  // snr exactly 1 and 3 via tailored channel gains
  dev.channel_gain = 1e6 * dev.noise_psd_w_per_hz / dev.tx_power_w;
  CHECK(spectral_efficiency(dev, 1e6) == doctest::Approx(1.0).epsilon(1e-12));
  dev.channel_gain *= 3.0;
  CHECK(spectral_efficiency(dev, 1e6) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(spectral_efficiency(dev, 0.0), ValidationError);
  CHECK_THROWS_AS(spectral_efficiency(dev, -1e6), ValidationError);
}

TEST_CASE("upload time and energy") {
  const DeviceScenario dev = testutil::alexnet_device(0.2, 0.05, 100.0);
  const double eta = spectral_efficiency(dev, 1e6);
  const double d_bits = 0.146 * kBitsPerMb;
  const double t = offload_time_for_bits(dev, d_bits, 1e6);
  CHECK(t == doctest::Approx(d_bits / (1e6 * eta)).epsilon(1e-14));
  CHECK(t == doctest::Approx(0.07644).epsilon(1e-3));
  CHECK(dev.tx_power_w * t == doctest::Approx(0.0764).epsilon(1e-3));

  CHECK(offload_time_for_bits(dev, 0.0, 1e6) == 0.0);

  double prev = offload_time_for_bits(dev, d_bits, 2e5);
  for (double b = 4e5; b <= 2e7; b *= 2.0) {
    const double cur = offload_time_for_bits(dev, d_bits, b);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("device-stage mean time and energy at a fixture point") {
  const DeviceScenario dev = testutil::alexnet_device(0.3, 0.05);
  // point 8: w = 1.4214 GFLOPs, g = 7.1037 FLOPs/cycle
  const double t = expected_local_time(dev, 8, 1.2e9);
  CHECK(t == doctest::Approx(1.4214 / (7.1037 * 1.2)).epsilon(1e-12));
  CHECK(t == doctest::Approx(0.16674).epsilon(1e-4));
  const double e = expected_local_energy(dev, 8, 1.2e9);
  CHECK(e == doctest::Approx(0.8e-27 * (1.4214e9 / 7.1037) * 1.44e18).epsilon(1e-12));
  CHECK(e == doctest::Approx(0.2305).epsilon(1e-3));

  CHECK(expected_local_time(dev, 0, 1.2e9) == 0.0);
  CHECK(expected_local_energy(dev, 0, 1.2e9) == 0.0);
  CHECK_THROWS_AS(expected_local_time(dev, 8, 1e7), ValidationError);   // below f_min
  CHECK_THROWS_AS(expected_local_energy(dev, 8, 2e9), ValidationError); // above f_max
}

TEST_CASE("total time sums the stage means") {
  const DeviceScenario dev = testutil::alexnet_device(0.3, 0.05, 100.0);
  const double t_loc = expected_local_time(dev, 8, 1.2e9);
  const double t_off = offload_time(dev, 8, 1e6);
  // point 8 is the last one: no vm term
  CHECK(dev.profile->at(8).vm_mean_s == 0.0);
  CHECK(expected_total_time(dev, 8, 1e6, 1.2e9) == doctest::Approx(t_loc + t_off).epsilon(1e-14));
  CHECK(expected_total_time(dev, 8, 1e6, 1.2e9) == doctest::Approx(0.16727).epsilon(1e-3));
  CHECK(expected_total_energy(dev, 8, 1e6, 1.2e9) ==
        doctest::Approx(expected_local_energy(dev, 8, 1.2e9) + offload_energy(dev, 8, 1e6))
            .epsilon(1e-14));
  // interior point includes the vm mean
  const int m = 4;
  CHECK(expected_total_time(dev, m, 1e6, 1.2e9) ==
        doctest::Approx(expected_local_time(dev, m, 1.2e9) + offload_time(dev, m, 1e6) +
                        dev.profile->at(m).vm_mean_s)
            .epsilon(1e-14));
}

TEST_CASE("formulas are pure") {
  const DeviceScenario dev = testutil::alexnet_device(0.3, 0.05);
  CHECK(expected_total_time(dev, 5, 2.2e6, 0.9e9) == expected_total_time(dev, 5, 2.2e6, 0.9e9));
  CHECK(spectral_efficiency(dev, 3.3e6) == spectral_efficiency(dev, 3.3e6));
}

TEST_CASE("b*eta(b) is concave and energy is monotone") {
  const DeviceScenario dev = testutil::alexnet_device(0.3, 0.05);
  auto rate = [&](double b) { return b * spectral_efficiency(dev, b); };
  for (double b = 2e5; b < 2e7; b *= 1.37) {
    const double h = 1e-3 * b;
    const double second = rate(b + h) + rate(b - h) - 2.0 * rate(b);
    CHECK(second / rate(b) <= 1e-9);  // concavity up to rounding
  }
  // energy strictly increasing in f, strictly decreasing in b at fixed m
  const int m = 4;
  double prev_e = expected_total_energy(dev, m, 1e6, 2e8);
  for (double f = 3e8; f <= 1.2e9; f += 1e8) {
    const double e = expected_total_energy(dev, m, 1e6, f);
    CHECK(e > prev_e);
    prev_e = e;
  }
  prev_e = expected_total_energy(dev, m, 5e5, 6e8);
  for (double b = 1e6; b <= 2e7; b *= 2.0) {
    const double e = expected_total_energy(dev, m, b, 6e8);
    CHECK(e < prev_e);
    prev_e = e;
  }
}

TEST_CASE("profile validation catches broken inputs") {
  const DnnProfile good = testutil::toy_profile();
  CHECK_NOTHROW(good.validate());

  DnnProfile p = good;
  p.points[2].cum_workload_flops = p.points[1].cum_workload_flops;  // not increasing
  CHECK_THROWS_AS(p.validate(), ValidationError);

  p = good;
  p.points[1].local_var_s2 = -1e-9;
  CHECK_THROWS_AS(p.validate(), ValidationError);

  p = good;
  p.points[1].out_data_bits = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);

  p = good;
  p.points[0].cum_workload_flops = 1.0;  // local work at the pure-offload point
  CHECK_THROWS_AS(p.validate(), ValidationError);

  p = good;
  p.points[2].vm_mean_s = 0.01;  // vm work at the pure-local point
  CHECK_THROWS_AS(p.validate(), ValidationError);

  p = good;
  p.covariance_s2(1, 2) = 1e-6;  // asymmetric
  CHECK_THROWS_AS(p.validate(), ValidationError);

  p = good;
  p.covariance_s2(0, 0) = 1e-6;  // row/col 0 must stay zero
  CHECK_THROWS_AS(p.validate(), ValidationError);

  p = good;
  p.covariance_s2(1, 1) += 1e-9;  // diagonal must match v_loc + v_vm
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("decision and allocation invariants") {
  auto prof = std::make_shared<const DnnProfile>(testutil::toy_profile());
  std::vector<DeviceScenario> devs = {testutil::make_device(prof, 0.3, 0.1, 50.0, 0),
                                      testutil::make_device(prof, 0.3, 0.1, 80.0, 1)};
  PartitionDecision d = PartitionDecision::one_hot(devs, {0, 2});
  CHECK_NOTHROW(d.validate(true));
  CHECK(d.is_binary());
  CHECK(d.point_of(0) == 0);
  CHECK(d.point_of(1) == 2);

  d.x[0] = {0.5, 0.5, 0.0};
  CHECK_NOTHROW(d.validate(false));
  CHECK_THROWS_AS(d.validate(true), ValidationError);
  CHECK_FALSE(d.is_binary());

  d.x[0] = {0.5, 0.4, 0.0};  // does not sum to 1
  CHECK_THROWS_AS(d.validate(false), ValidationError);
  CHECK_THROWS_AS(PartitionDecision::one_hot(devs, {0, 3}), ValidationError);

  Allocation a;
  a.bandwidth_hz = {2e6, 2e6};
  a.frequency_hz = {5e8, 5e8};
  CHECK_NOTHROW(a.validate(devs, 5e6));
  a.bandwidth_hz = {3e6, 3e6};
  CHECK_THROWS_AS(a.validate(devs, 5e6), ValidationError);  // exceeds the budget
  a.bandwidth_hz = {2e6, 0.0};
  CHECK_THROWS_AS(a.validate(devs, 5e6), ValidationError);  // non-positive share
  a.bandwidth_hz = {2e6, 2e6};
  a.frequency_hz = {5e8, 2e9};
  CHECK_THROWS_AS(a.validate(devs, 5e6), ValidationError);  // f above range
}
