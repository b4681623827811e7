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
#include <random>

#include "doctest.h"
#include "edgepart/ccp.hpp"
#include "edgepart/error.hpp"
#include "edgepart/policies.hpp"
#include "edgepart/resource.hpp"
#include "testutil.hpp"

using namespace edgepart;

namespace {

/// Grid oracle for two devices: b1 on a grid (b2 = B - b1, more bandwidth
/// never hurts), per-device frequency on its own grid, cheapest feasible f.
double two_device_grid_oracle(const std::vector<DeviceScenario>& devs,
                              const std::vector<int>& points, double total_b, int resolution) {
  const double floor = 2e3;
  double best = std::numeric_limits<double>::infinity();
  for (int ib = 1; ib < resolution; ++ib) {
    const double b1 =
        floor + (total_b - 2.0 * floor) * static_cast<double>(ib) / static_cast<double>(resolution);
    const double bs[2] = {b1, total_b - b1};
    double total = 0.0;
    bool ok = true;
    for (int n = 0; n < 2 && ok; ++n) {
      double best_dev = std::numeric_limits<double>::infinity();
      for (int fi = 0; fi <= resolution; ++fi) {
        const double f = devs[static_cast<size_t>(n)].f_min_hz +
                         (devs[static_cast<size_t>(n)].f_max_hz - devs[static_cast<size_t>(n)].f_min_hz) *
                             static_cast<double>(fi) / static_cast<double>(resolution);
        if (deadline_slack(devs[static_cast<size_t>(n)], points[static_cast<size_t>(n)], bs[n], f) < 0.0)
          continue;
        best_dev = std::min(best_dev, expected_total_energy(devs[static_cast<size_t>(n)],
                                                            points[static_cast<size_t>(n)], bs[n], f));
      }
      if (!std::isfinite(best_dev)) ok = false;
      total += best_dev;
    }
    if (ok) best = std::min(best, total);
  }
  return best;
}

}  // namespace

TEST_CASE("full offload takes all bandwidth and the lowest frequency") {
  auto prof = std::make_shared<const DnnProfile>(testutil::toy_profile(0.0, 0.0));
  auto devs = mean_value_devices({testutil::make_device(prof, 0.12, 0.1, 100.0)});
  const double total_b = 1e7;
  RaInstance inst{devs, {0}, total_b};
  const RaSolution sol = solve_ra(inst);
  CHECK(sol.allocation.bandwidth_hz[0] == doctest::Approx(total_b).epsilon(1e-3));
  CHECK(sol.allocation.frequency_hz[0] == devs[0].f_min_hz);
  // 1-D bisection oracle on the deadline-binding upload: b must stay within
  // budget, and the optimal energy is the full-budget upload energy.
  double lo = 2e3, hi = total_b;
  REQUIRE(deadline_slack(devs[0], 0, hi, devs[0].f_min_hz) >= 0.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (deadline_slack(devs[0], 0, mid, devs[0].f_min_hz) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  CHECK(hi <= total_b);
  CHECK(sol.energy_j ==
        doctest::Approx(expected_total_energy(devs[0], 0, total_b, devs[0].f_min_hz)).epsilon(2e-3));
}

TEST_CASE("symmetric devices split the bandwidth evenly") {
  std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.2, 0.05, 120.0, 0),
                                      testutil::alexnet_device(0.2, 0.05, 120.0, 1)};
  RaInstance inst{devs, {4, 4}, 5e6};
  const RaSolution sol = solve_ra(inst);
  CHECK(sol.allocation.bandwidth_hz[0] ==
        doctest::Approx(sol.allocation.bandwidth_hz[1]).epsilon(1e-6));
  CHECK(sol.allocation.frequency_hz[0] ==
        doctest::Approx(sol.allocation.frequency_hz[1]).epsilon(1e-6));
}

TEST_CASE("solver beats the 200x200 grid oracle") {
  std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.2, 0.05, 140.0, 0),
                                      testutil::alexnet_device(0.22, 0.07, 80.0, 1)};
  const std::vector<int> points = {4, 6};
  const double total_b = 4e6;
  RaInstance inst{devs, points, total_b};
  const RaSolution sol = solve_ra(inst);
  const double grid = two_device_grid_oracle(devs, points, total_b, 200);
  CHECK(sol.energy_j <= grid * 1.005);
}

TEST_CASE("returned allocations satisfy every constraint") {
  std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.19, 0.04, 150.0, 0),
                                      testutil::alexnet_device(0.21, 0.06, 60.0, 1),
                                      testutil::alexnet_device(0.25, 0.10, 200.0, 2)};
  const std::vector<int> points = {4, 2, 7};
  RaInstance inst{devs, points, 6e6};
  const RaSolution sol = solve_ra(inst);
  CHECK_NOTHROW(sol.allocation.validate(devs, 6e6));
  for (size_t n = 0; n < devs.size(); ++n) {
    CHECK(deadline_slack(devs[n], points[n], sol.allocation.bandwidth_hz[n],
                         sol.allocation.frequency_hz[n]) >= -1e-6);
  }
  CHECK(sol.report.converged);
  CHECK(sol.report.kkt_residual <= 1e-8);
}

TEST_CASE("no single coordinate perturbation improves the optimum") {
  std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.2, 0.05, 120.0, 0),
                                      testutil::alexnet_device(0.22, 0.08, 90.0, 1)};
  const std::vector<int> points = {4, 6};
  const double total_b = 4e6;
  RaInstance inst{devs, points, total_b};
  const RaSolution sol = solve_ra(inst);
  double used = 0.0;
  for (double b : sol.allocation.bandwidth_hz) used += b;
  for (size_t n = 0; n < devs.size(); ++n) {
    for (double factor : {0.99, 1.01}) {
      Allocation alt = sol.allocation;
      alt.bandwidth_hz[n] *= factor;
      const double alt_used = used + alt.bandwidth_hz[n] - sol.allocation.bandwidth_hz[n];
      if (alt_used <= total_b &&
          deadline_slack(devs[n], points[n], alt.bandwidth_hz[n], alt.frequency_hz[n]) >= 0.0) {
        double e = 0.0;
        for (size_t k = 0; k < devs.size(); ++k)
          e += expected_total_energy(devs[k], points[k], alt.bandwidth_hz[k], alt.frequency_hz[k]);
        CHECK(e >= sol.energy_j * (1.0 - 1e-6));
      }
      alt = sol.allocation;
      alt.frequency_hz[n] =
          std::min(std::max(alt.frequency_hz[n] * factor, devs[n].f_min_hz), devs[n].f_max_hz);
      if (deadline_slack(devs[n], points[n], alt.bandwidth_hz[n], alt.frequency_hz[n]) >= 0.0) {
        double e = 0.0;
        for (size_t k = 0; k < devs.size(); ++k)
          e += expected_total_energy(devs[k], points[k], alt.bandwidth_hz[k], alt.frequency_hz[k]);
        CHECK(e >= sol.energy_j * (1.0 - 1e-6));
      }
    }
  }
}

TEST_CASE("optimal energy is monotone in the risk level and the deadline") {
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.03, 0.05, 0.07, 0.09}) {
    std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.2, eps, 120.0, 0),
                                        testutil::alexnet_device(0.2, eps, 90.0, 1)};
    RaInstance inst{devs, {4, 4}, 4e6};
    const double e = solve_ra(inst).energy_j;
    CHECK(e <= prev + 1e-9);
    prev = e;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double d : {0.18, 0.2, 0.22, 0.26}) {
    std::vector<DeviceScenario> devs = {testutil::alexnet_device(d, 0.05, 120.0, 0),
                                        testutil::alexnet_device(d, 0.05, 90.0, 1)};
    RaInstance inst{devs, {4, 4}, 4e6};
    const double e = solve_ra(inst).energy_j;
    CHECK(e <= prev + 1e-9);
    prev = e;
  }
}

TEST_CASE("bandwidth complementarity at the optimum") {
  std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.2, 0.05, 120.0, 0),
                                      testutil::alexnet_device(0.22, 0.08, 90.0, 1)};
  const double total_b = 4e6;
  const std::vector<int> points = {4, 6};
  RaInstance inst{devs, points, total_b};
  const RaSolution sol = solve_ra(inst);
  double used = 0.0;
  for (double b : sol.allocation.bandwidth_hz) used += b;
  if (used < total_b * (1.0 - 1e-6)) {
    // Unspent bandwidth is only optimal when no device could use it.
    for (size_t n = 0; n < devs.size(); ++n) {
      const double slack = deadline_slack(devs[n], points[n], sol.allocation.bandwidth_hz[n],
                                          sol.allocation.frequency_hz[n]);
      const OffloadTimeDerivs od = offload_time_derivs(
          devs[n], devs[n].profile->at(points[n]).out_data_bits, sol.allocation.bandwidth_hz[n]);
      CHECK((slack > 0.0 || std::abs(od.dt_db) < 1e-12));
    }
  } else {
    CHECK(used <= total_b * (1.0 + 1e-9));
  }
}

TEST_CASE("feasibility probe") {
  auto prof = std::make_shared<const DnnProfile>(testutil::toy_profile(0.0, 0.0));
  auto devs = mean_value_devices({testutil::make_device(prof, 0.5, 0.5, 100.0)});
  const double total_b = 1e7;
  // closed form at the pure-local point: local at f_max plus the result upload
  const double want = devs[0].profile->at(2).cum_workload_flops /
                          (devs[0].profile->at(2).throughput_flops_per_cycle * devs[0].f_max_hz) +
                      offload_time_for_bits(devs[0], devs[0].profile->at(2).out_data_bits, total_b);
  RaInstance inst{devs, {2}, total_b};
  CHECK(ra_feasibility_probe(inst)[0] == doctest::Approx(want).epsilon(1e-12));

  // at eps = 0.5 (sigma = 1) the dispersion adds exactly sqrt(v_loc + v_vm)
  auto vprof = std::make_shared<const DnnProfile>(testutil::toy_profile(20.0, 40.0));
  DeviceScenario noisy = testutil::make_device(vprof, 0.5, 0.5, 100.0);
  const BlockStats& p2 = vprof->at(2);
  RaInstance vinst{{noisy}, {2}, total_b};
  CHECK(ra_feasibility_probe(vinst)[0] ==
        doctest::Approx(want + std::sqrt(p2.local_var_s2 + p2.vm_var_s2)).epsilon(1e-9));

  // bisection oracle on the deadline for the bundled profile at 100 m
  const DeviceScenario dev = testutil::alexnet_device(0.5, 0.05, 100.0);
  RaInstance ainst{{dev}, {4}, total_b};
  const double probe = ra_feasibility_probe(ainst)[0];
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    DeviceScenario d2 = dev;
    d2.deadline_s = mid;
    if (deadline_slack(d2, 4, total_b, d2.f_max_hz) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  CHECK(probe == doctest::Approx(hi).epsilon(1e-9));

  // the probe shrinks as the risk level grows
  DeviceScenario relaxed = dev;
  relaxed.epsilon = 0.2;
  RaInstance rinst{{relaxed}, {4}, total_b};
  CHECK(ra_feasibility_probe(rinst)[0] < probe);
}

TEST_CASE("impossible deadlines name the blocking devices") {
  std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.001, 0.05, 120.0, 7),
                                      testutil::alexnet_device(0.3, 0.05, 90.0, 8)};
  RaInstance inst{devs, {4, 4}, 5e6};
  try {
    solve_ra(inst);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    REQUIRE(e.device_ids.size() == 1);
    CHECK(e.device_ids[0] == 7);
  }
}

TEST_CASE("bandwidth contention is certified jointly") {
  // Each device alone is fine with the whole band; together they are not.
  std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.155, 0.05, 100.0, 0),
                                      testutil::alexnet_device(0.155, 0.05, 100.0, 1),
                                      testutil::alexnet_device(0.155, 0.05, 100.0, 2)};
  const double total_b = 2.3e6;
  RaInstance inst{devs, {0, 0, 0}, total_b};
  const Vec probe = ra_feasibility_probe(inst);
  for (double p : probe) CHECK(p <= 0.155);  // alone each fits
  CHECK_THROWS_AS(solve_ra(inst), InfeasibleError);
  // grid scan over bandwidth splits confirms the certificate: slack is
  // maximal at f_max and the splits cover the simplex densely
  const int g = 60;
  double best_worst_slack = -1.0;
  for (int i = 1; i < g; ++i) {
    for (int j = 1; i + j < g; ++j) {
      const double b1 = total_b * i / g;
      const double b2 = total_b * j / g;
      const double b3 = total_b - b1 - b2;
      const double worst = std::min({deadline_slack(devs[0], 0, b1, devs[0].f_max_hz),
                                     deadline_slack(devs[1], 0, b2, devs[1].f_max_hz),
                                     deadline_slack(devs[2], 0, b3, devs[2].f_max_hz)});
      best_worst_slack = std::max(best_worst_slack, worst);
    }
  }
  CHECK(best_worst_slack < 0.0);
}

TEST_CASE("instance validation") {
  std::vector<DeviceScenario> devs = {testutil::alexnet_device(0.2, 0.05, 120.0, 0)};
  RaInstance bad{devs, {11}, 5e6};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  RaInstance nob{devs, {4}, 0.0};
  CHECK_THROWS_AS(nob.validate(), ValidationError);
  RaInstance mism{devs, {4, 4}, 5e6};
  CHECK_THROWS_AS(mism.validate(), ValidationError);
}
