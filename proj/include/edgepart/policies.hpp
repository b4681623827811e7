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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgepart/model.hpp"
#include "edgepart/pccp.hpp"
#include "edgepart/resource.hpp"

namespace edgepart {

enum class PolicyKind {
  robust,             // alternating allocation / partitioning with dispersion bounds
  worst_case,         // stage maxima instead of distributions, no tolerated misses
  mean_value,         // variances ignored entirely
  random_partition,   // random point among those shrinking the upload
  exhaustive_optimal  // enumeration oracle
};

std::string policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);

struct OrchestratorConfig {
  PccpConfig pccp;
  double outer_tol = 1e-4;  // relative objective change across one sweep
  int max_outer = 20;
  double kernel_tol = 1e-8;
  std::optional<int> initial_point;                // same start for every device
  std::optional<std::vector<int>> initial_points;  // per-device override
};

struct Solution {
  PolicyKind policy = PolicyKind::robust;
  PartitionDecision decision;
  Allocation allocation;
  double expected_energy_j = 0.0;
  int outer_iterations = 0;
  Vec objective_trace;                    // accepted energy after each sweep
  std::vector<PccpTraceRow> pccp_trace;   // trace of the last partitioning run
};

/// Alternates the allocation solve and the partitioning solve until the
/// objective settles (each accepted step non-increasing).
Solution solve_robust(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                      const OrchestratorConfig& cfg = {});

/// Robust pipeline on a padded, variance-free copy of every profile: stage
/// upper bounds enter the means and no deadline miss is tolerated.
Solution solve_worst_case(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                          const OrchestratorConfig& cfg = {});

/// Robust pipeline with every variance zeroed.
Solution solve_mean_value(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                          const OrchestratorConfig& cfg = {});

/// Uniform random point among {m : d_m < d_0} per device, then an allocation
/// solve; resamples up to 50 times when the draw is infeasible.
Solution solve_random(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                      uint64_t seed, const OrchestratorConfig& cfg = {});

/// Enumerates every binary decision (guarded at 1e7), solving the allocation
/// for each one that survives valid feasibility/energy lower bounds. Ties
/// break to the lexicographically smallest decision.
Solution solve_exhaustive(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                          const OrchestratorConfig& cfg = {});

Solution solve_policy(PolicyKind kind, const std::vector<DeviceScenario>& devices,
                      double total_bandwidth_hz, uint64_t seed, const OrchestratorConfig& cfg = {});

/// Devices with profiles transformed for the worst-case baseline.
std::vector<DeviceScenario> worst_case_devices(const std::vector<DeviceScenario>& devices);
/// Devices with profiles transformed for the mean-value baseline.
std::vector<DeviceScenario> mean_value_devices(const std::vector<DeviceScenario>& devices);

/// Candidate partition points of the random policy: {m : d_m < d_0}.
std::vector<int> random_policy_candidates(const DeviceScenario& dev);

std::string solution_to_json(const Solution& sol, const std::vector<DeviceScenario>& devices);

}  // namespace edgepart
