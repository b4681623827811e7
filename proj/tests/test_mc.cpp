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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "doctest.h"
#include "edgepart/ccp.hpp"
#include "edgepart/error.hpp"
#include "edgepart/mc.hpp"
#include "testutil.hpp"

using namespace edgepart;

namespace {

std::vector<DeviceScenario> alexnet_pair(double deadline, double eps) {
  return {testutil::alexnet_device(deadline, eps, 124.0, 0),
          testutil::alexnet_device(deadline, eps, 71.0, 1)};
}

}  // namespace

TEST_CASE("zero variance always reproduces the mean") {
  auto devs = mean_value_devices({testutil::alexnet_device(0.25, 0.05, 100.0)});
  SamplingModel model;
  Rng rng(9);
  const double want = expected_total_time(devs[0], 4, 2e6, 8e8);
  for (int i = 0; i < 50; ++i)
    CHECK(sample_total_time(devs[0], 4, 2e6, 8e8, model, 0, rng) == want);
}

TEST_CASE("gaussian stage samples match the profile moments") {
  const DeviceScenario dev = testutil::alexnet_device(0.3, 0.05, 100.0);
  const int m = 4;
  const BlockStats& p = dev.profile->at(m);
  SamplingModel model;
  Rng rng(17);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  const double t_off = offload_time(dev, m, 2e6);
  for (int i = 0; i < n; ++i) {
    const double t = sample_total_time(dev, m, 2e6, 8e8, model, 0, rng);
    sum += t;
    sumsq += t * t;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double want_mean = expected_local_time(dev, m, 8e8) + t_off + p.vm_mean_s;
  // stage means sit far above 3 sigma here, so truncation distorts nothing
  CHECK(mean == doctest::Approx(want_mean).epsilon(0.02));
  CHECK(var == doctest::Approx(p.local_var_s2 + p.vm_var_s2).epsilon(0.02));
}

TEST_CASE("trace replay only produces the recorded values") {
  const DeviceScenario dev = testutil::alexnet_device(0.3, 0.05, 100.0);
  auto emp = std::make_shared<EmpiricalSamples>();
  emp->per_device = {{{0.10, 0.001}, {0.12, 0.002}, {0.14, 0.0}}};
  SamplingModel model;
  model.kind = SamplingKind::empirical_trace;
  model.empirical = emp;
  Rng rng(3);
  const double t_off = offload_time(dev, 4, 2e6);
  std::set<double> seen;
  for (int i = 0; i < 200; ++i) seen.insert(sample_total_time(dev, 4, 2e6, 8e8, model, 0, rng));
  CHECK(seen.size() == 3);
  for (double t : seen) {
    const bool known = std::abs(t - (0.101 + t_off)) < 1e-12 ||
                       std::abs(t - (0.122 + t_off)) < 1e-12 ||
                       std::abs(t - (0.14 + t_off)) < 1e-12;
    CHECK(known);
  }
}

TEST_CASE("violation probabilities per policy") {
  const auto devs = alexnet_pair(0.2, 0.05);
  const double total_b = 5e6;
  SamplingModel gauss;

  SUBCASE("robust stays below the risk level") {
    const Solution rb = solve_robust(devs, total_b);
    const EvaluationReport rep = evaluate(rb, devs, gauss, 20000, 5);
    CHECK(rep.violation_aggregate <= 0.05);
    for (double v : rep.violation_per_device) CHECK(v <= 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / 20000));
  }
  SUBCASE("mean value overshoots on a noisy profile") {
    const Solution mv = solve_mean_value(devs, total_b);
    const EvaluationReport rep = evaluate(mv, devs, gauss, 20000, 5);
    CHECK(rep.violation_aggregate > 0.05);
  }
  SUBCASE("worst case never misses under a bounded model") {
    const Solution wc = solve_worst_case(devs, total_b);
    SamplingModel twopt;
    twopt.kind = SamplingKind::two_point;
    const EvaluationReport rep = evaluate(wc, devs, twopt, 20000, 5);
    CHECK(rep.violation_aggregate == 0.0);
  }
}

TEST_CASE("realized energy concentrates on the expectation") {
  const auto devs = alexnet_pair(0.2, 0.05);
  const Solution rb = solve_robust(devs, 5e6);
  SamplingModel gauss;
  const EvaluationReport rep = evaluate(rb, devs, gauss, 100000, 11);
  CHECK(rep.mean_realized_energy_j == doctest::Approx(rep.expected_energy_j).epsilon(0.02));
}

TEST_CASE("distribution-free guarantee holds for every matched-moment model") {
  const auto devs = alexnet_pair(0.2, 0.05);
  const Solution rb = solve_robust(devs, 5e6);
  // the solution satisfies the deterministic bound with nonneg slack
  for (size_t n = 0; n < devs.size(); ++n) {
    CHECK(deadline_slack(devs[n], rb.decision.point_of(static_cast<int>(n)),
                         rb.allocation.bandwidth_hz[n], rb.allocation.frequency_hz[n]) >= -1e-6);
  }
  const int n_samples = 20000;
  const double bound = 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / n_samples);

  SamplingModel gauss;
  CHECK(evaluate(rb, devs, gauss, n_samples, 7).violation_aggregate <= bound);

  SamplingModel twopt;
  twopt.kind = SamplingKind::two_point;
  CHECK(evaluate(rb, devs, twopt, n_samples, 7).violation_aggregate <= bound);

  // shifted exponential with the same stage moments, replayed as a trace
  auto emp = std::make_shared<EmpiricalSamples>();
  emp->per_device.resize(devs.size());
  Rng gen(1234);
  for (size_t n = 0; n < devs.size(); ++n) {
    const int m = rb.decision.point_of(static_cast<int>(n));
    const BlockStats& p = devs[n].profile->at(m);
    const double mu_loc = expected_local_time(devs[n], m, rb.allocation.frequency_hz[n]);
    const double sd_loc = std::sqrt(p.local_var_s2);
    const double sd_vm = std::sqrt(p.vm_var_s2);
    for (int i = 0; i < 50000; ++i) {
      const double e1 = -std::log(1.0 - gen.uniform());
      const double e2 = -std::log(1.0 - gen.uniform());
      emp->per_device[n].push_back({std::max(0.0, mu_loc - sd_loc + sd_loc * e1),
                                    std::max(0.0, p.vm_mean_s - sd_vm + sd_vm * e2)});
    }
  }
  SamplingModel expo;
  expo.kind = SamplingKind::empirical_trace;
  expo.empirical = emp;
  CHECK(evaluate(rb, devs, expo, n_samples, 7).violation_aggregate <= bound);
}

TEST_CASE("evaluation is seed deterministic and validates inputs") {
  const auto devs = alexnet_pair(0.2, 0.05);
  const Solution rb = solve_robust(devs, 5e6);
  SamplingModel gauss;
  const EvaluationReport a = evaluate(rb, devs, gauss, 2000, 77);
  const EvaluationReport b = evaluate(rb, devs, gauss, 2000, 77);
  CHECK(a.violation_aggregate == b.violation_aggregate);
  CHECK(a.mean_realized_energy_j == b.mean_realized_energy_j);
  const EvaluationReport c = evaluate(rb, devs, gauss, 2000, 78);
  CHECK(c.mean_realized_energy_j != a.mean_realized_energy_j);
  CHECK_THROWS_AS(evaluate(rb, devs, gauss, 500, 77), ValidationError);  // too few samples
}

TEST_CASE("truncation warnings appear once the mean gets close to zero") {
  DnnProfile p = testutil::toy_profile(20.0, 40.0);
  // make the vm stage mean tiny against its sigma
  p.points[1].vm_mean_s = 1e-4;
  p.points[1].vm_var_s2 = 1e-6;  // sd = 1e-3 >> mean
  apply_diagonal_covariance(p);
  auto prof = std::make_shared<const DnnProfile>(std::move(p));
  std::vector<DeviceScenario> devs = {testutil::make_device(prof, 0.6, 0.3, 100.0)};
  Solution sol;
  sol.policy = PolicyKind::robust;
  sol.decision = PartitionDecision::one_hot(devs, {1});
  sol.allocation.bandwidth_hz = {5e6};
  sol.allocation.frequency_hz = {8e8};
  sol.expected_energy_j = expected_total_energy(devs[0], 1, 5e6, 8e8);
  SamplingModel gauss;
  const EvaluationReport rep = evaluate(sol, devs, gauss, 2000, 5);
  REQUIRE_FALSE(rep.warnings.empty());
  CHECK(rep.warnings[0].find("truncated mean") != std::string::npos);
}

TEST_CASE("a single-cell sweep equals one evaluate call") {
  const auto devs = alexnet_pair(0.2, 0.05);
  SweepSpec spec;
  spec.policies = {PolicyKind::robust};
  spec.epsilon_grid = {0.05};
  spec.deadline_grid_s = {0.2};
  spec.n_samples = 2000;
  spec.master_seed = 31;
  const std::string csv = sweep_csv(devs, 5e6, spec, "cell");

  const Solution rb = solve_robust(devs, 5e6);
  const EvaluationReport rep =
      evaluate(rb, devs, spec.model, spec.n_samples, derive_seed(31, 1), "cell");
  char want[160];
  std::snprintf(want, sizeof(want), ",all,%.12g,%.12g,%.12g,%d,", rep.violation_aggregate,
                rep.mean_realized_energy_j, rep.expected_energy_j, spec.n_samples);
  CHECK(csv.find(want) != std::string::npos);
  // header + one row per device + the aggregate row
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("sweeps are byte-identical across runs and jobs") {
  const auto devs = alexnet_pair(0.2, 0.05);
  SweepSpec spec;
  spec.policies = {PolicyKind::robust, PolicyKind::mean_value};
  spec.epsilon_grid = {0.05, 0.09};
  spec.n_samples = 1000;
  spec.master_seed = 5;
  const std::string a = sweep_csv(devs, 5e6, spec, "det");
  const std::string b = sweep_csv(devs, 5e6, spec, "det");
  CHECK(a == b);
  spec.jobs = 2;
  const std::string c = sweep_csv(devs, 5e6, spec, "det");
  CHECK(a == c);
}

TEST_CASE("sweep records failed cells in-row") {
  auto devs = alexnet_pair(0.2, 0.05);
  SweepSpec spec;
  spec.policies = {PolicyKind::robust};
  spec.deadline_grid_s = {0.2, 0.001};  // the second cell is hopeless
  spec.n_samples = 1000;
  spec.master_seed = 2;
  const std::string csv = sweep_csv(devs, 5e6, spec, "failcell");
  CHECK(csv.find("nan") != std::string::npos);
  CHECK(csv.find(",200,") != std::string::npos);  // deadline column is in ms
  // header advertises the fixed schema
  CHECK(csv.rfind("scenario,policy,epsilon,deadline_ms,device,violation_prob,energy_j,"
                  "expected_energy_j,n_samples,seed\n",
                  0) == 0);
}
