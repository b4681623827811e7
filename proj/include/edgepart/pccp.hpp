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

#include <string>
#include <vector>

#include "edgepart/convex.hpp"
#include "edgepart/model.hpp"

namespace edgepart {

struct PccpConfig {
  double rho0 = 1.0;        // initial penalty weight
  double nu = 1.5;          // penalty growth factor (> 1)
  double rho_max = 1.0e4;   // penalty cap
  double theta_err = 1e-4;  // stop when ||x_i - x_{i-1}|| falls below
  int max_iters = 100;
  double round_threshold = 0.5;  // winning mass needed to accept the argmax
  double y_floor = 1e-6;         // numerical stand-in for y > 0 (seconds)
  double kernel_tol = 1e-8;

  void validate() const;
};

/// One iterate of the penalized linearized sequence.
struct PccpState {
  int iterate = 0;
  std::vector<Vec> x;       // relaxed decision rows, one per device
  Vec y;                    // auxiliary dispersion variables (s)
  double rho = 1.0;         // penalty weight used to produce this iterate
  Vec alpha, beta;          // slack values per device
  std::vector<Vec> gamma;   // slack values per device and point
  double objective_plus_penalty = 0.0;
};

struct PccpTraceRow {
  int iter = 0;
  double rho = 0.0;        // penalty weight used for this iterate
  double objective = 0.0;  // energy part only
  double penalty = 0.0;    // rho * (sum of slacks)
  double max_slack = 0.0;
  double dx_norm = 0.0;
};

struct PccpResult {
  PartitionDecision decision;       // binary, repaired if needed
  std::vector<Vec> relaxed;         // final relaxed rows
  std::vector<PccpTraceRow> trace;
  int iterations = 0;
  double slack_sum = 0.0;           // sum of all slacks at the last iterate
};

/// Joint convex program of one linearization step over every device's
/// (x, y, alpha, beta, gamma) block; previous iterate taken from `state`.
/// Exists for verification; the production path solves the identical
/// per-device blocks independently.
ConvexProgram build_inner_problem(const std::vector<DeviceScenario>& devices,
                                  const PccpState& state, const Allocation& alloc);

/// Penalty convex-concave procedure for the partitioning subproblem at fixed
/// bandwidths/frequencies. Returns the rounded binary decision; throws
/// InfeasibleError when no point of some device can meet its deadline.
PccpResult pccp_solve(const std::vector<DeviceScenario>& devices, const Allocation& alloc,
                      const PccpConfig& cfg = {});

/// Argmax rounding with feasibility repair: a device whose rounded point
/// violates its deterministic deadline falls back to the feasible point of
/// smallest deterministic total time (ties to the lower index).
PartitionDecision round_and_repair(const std::vector<Vec>& x_relaxed,
                                   const std::vector<DeviceScenario>& devices,
                                   const Allocation& alloc, double round_threshold = 0.5);

void write_pccp_trace_csv(const std::vector<PccpTraceRow>& rows, const std::string& path);

}  // namespace edgepart
