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

#include <optional>
#include <vector>

#include "edgepart/convex.hpp"
#include "edgepart/model.hpp"

namespace edgepart {

/// Bandwidth/frequency allocation instance: every device has a fixed
/// partition point and shares one uplink bandwidth budget.
struct RaInstance {
  std::vector<DeviceScenario> devices;
  std::vector<int> points;        // chosen partition point per device
  double total_bandwidth_hz = 0.0;

  void validate() const;
};

struct RaSolution {
  Allocation allocation;
  double energy_j = 0.0;
  SolveReport report;
};

/// Minimizes total expected energy over (b, f) subject to the per-device
/// deterministic deadline bounds, the bandwidth budget and frequency boxes.
/// Throws InfeasibleError (listing blocking devices) when no allocation can
/// meet some deadline, NumericError when the interior-point solve fails.
RaSolution solve_ra(const RaInstance& inst, double tol = 1e-8,
                    const std::optional<Allocation>& warm_start = std::nullopt);

/// Smallest deadline each device could satisfy when given the whole bandwidth
/// and its maximum frequency; the infeasibility certificate for scenario
/// design and error messages.
Vec ra_feasibility_probe(const RaInstance& inst);

/// Same probe for one device at one point.
double probe_min_deadline(const DeviceScenario& dev, int m, double total_bandwidth_hz);

/// Valid per-point relaxations used for search pruning and greedy seeding:
/// any feasible joint allocation gives the device at least b_min bandwidth
/// and costs it at least energy_lb.
struct PointBounds {
  double min_deadline_s = 0.0;   // total time at (B, f_max)
  double b_min_hz = 0.0;         // bandwidth needed at f_max (inf if none)
  double energy_lb_j = 0.0;      // energy at b = B and the slowest legal f
};
PointBounds point_bounds(const DeviceScenario& dev, int m, double total_bandwidth_hz);

}  // namespace edgepart
