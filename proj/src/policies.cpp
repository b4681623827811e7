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

#include "edgepart/policies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "json.hpp"

#include "edgepart/error.hpp"
#include "edgepart/profile_io.hpp"

namespace edgepart {

namespace {

std::shared_ptr<const DnnProfile> transform_profile(const DnnProfile& src, bool pad_worst_case) {
  DnnProfile p = src;
  p.name = src.name + (pad_worst_case ? "#worst_case" : "#mean_value");
  for (int m = 0; m <= p.max_point(); ++m) {
    BlockStats& b = p.points[static_cast<size_t>(m)];
    if (pad_worst_case) b.time_pad_s += src.wc_local_margin(m) + src.wc_vm_margin(m);
    b.local_var_s2 = 0.0;
    b.vm_var_s2 = 0.0;
  }
  apply_diagonal_covariance(p);
  p.validate();
  return std::make_shared<const DnnProfile>(std::move(p));
}

std::vector<DeviceScenario> transformed(const std::vector<DeviceScenario>& devices,
                                        bool pad_worst_case) {
  std::map<const DnnProfile*, std::shared_ptr<const DnnProfile>> cache;
  std::vector<DeviceScenario> out = devices;
  for (DeviceScenario& d : out) {
    auto it = cache.find(d.profile.get());
    if (it == cache.end())
      it = cache.emplace(d.profile.get(), transform_profile(*d.profile, pad_worst_case)).first;
    d.profile = it->second;
  }
  return out;
}

/// Energy-greedy feasible start: per device, the point of least energy floor
/// among those whose deadline is reachable at all. The floor is priced at an
/// effective bandwidth (the full budget is optimistic once devices share it).
std::vector<int> greedy_points(const std::vector<DeviceScenario>& devices,
                               double total_bandwidth_hz, double pricing_bandwidth_hz) {
  std::vector<int> points(devices.size(), 0);
  std::vector<int> blocked;
  for (size_t n = 0; n < devices.size(); ++n) {
    const DeviceScenario& dev = devices[n];
    int best = -1;
    double best_e = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= dev.profile->max_point(); ++m) {
      const PointBounds pb = point_bounds(dev, m, total_bandwidth_hz);
      if (pb.min_deadline_s > dev.deadline_s) continue;
      double price = pb.energy_lb_j;
      if (pricing_bandwidth_hz < total_bandwidth_hz) {
        const PointBounds shared = point_bounds(dev, m, pricing_bandwidth_hz);
        if (shared.min_deadline_s <= dev.deadline_s) price = shared.energy_lb_j;
        // else keep the optimistic price: the point may still work with a
        // larger-than-fair bandwidth share.
      }
      if (price < best_e) {
        best = m;
        best_e = price;
      }
    }
    if (best < 0) {
      blocked.push_back(dev.id);
      continue;
    }
    points[n] = best;
  }
  if (!blocked.empty()) {
    std::string msg = "no feasible start: deadline unreachable for device(s)";
    for (int id : blocked) msg += ' ' + std::to_string(id);
    throw InfeasibleError(msg, blocked);
  }
  return points;
}

struct SweepStep {
  std::vector<int> points;
  RaSolution ra;
  bool improved = false;
};

/// One deterministic pass of decision moves, accepting strict improvements:
/// per-device point switches (the allocation re-solves jointly), then
/// all-device uniform shifts, which unlock moves blocked by bandwidth when
/// every deadline binds at once. Escapes alternation basins created by
/// frequencies and bandwidths tuned to the incumbent decision.
SweepStep improvement_sweep(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                            std::vector<int> points, RaSolution incumbent, double kernel_tol) {
  SweepStep out;
  auto try_candidate = [&](const std::vector<int>& cand) -> bool {
    try {
      RaInstance inst{devices, cand, total_bandwidth_hz};
      RaSolution ra = solve_ra(inst, kernel_tol, incumbent.allocation);
      if (ra.energy_j < incumbent.energy_j - 1e-12) {
        incumbent = ra;
        points = cand;
        out.improved = true;
        return true;
      }
    } catch (const InfeasibleError&) {
    }
    return false;
  };
  for (size_t n = 0; n < devices.size(); ++n) {
    const DeviceScenario& dev = devices[n];
    std::vector<int> cand = points;
    int best_m = points[n];
    double best_energy = incumbent.energy_j;
    RaSolution best = incumbent;
    for (int m = 0; m <= dev.profile->max_point(); ++m) {
      if (m == points[n]) continue;
      if (point_bounds(dev, m, total_bandwidth_hz).min_deadline_s > dev.deadline_s) continue;
      cand[n] = m;
      try {
        RaInstance inst{devices, cand, total_bandwidth_hz};
        RaSolution ra = solve_ra(inst, kernel_tol, incumbent.allocation);
        if (ra.energy_j < best_energy - 1e-12) {
          best = ra;
          best_m = m;
          best_energy = ra.energy_j;
        }
      } catch (const InfeasibleError&) {
      }
    }
    if (best_m != points[n]) {
      points[n] = best_m;
      incumbent = best;
      out.improved = true;
    }
  }
  int max_top = 0;
  for (const DeviceScenario& dev : devices)
    max_top = std::max(max_top, dev.profile->max_point());
  for (int m = 0; m <= max_top; ++m) {
    std::vector<int> cand(devices.size());
    bool viable = true;
    for (size_t n = 0; n < devices.size(); ++n) {
      cand[n] = std::min(m, devices[n].profile->max_point());
      if (point_bounds(devices[n], cand[n], total_bandwidth_hz).min_deadline_s >
          devices[n].deadline_s) {
        viable = false;
        break;
      }
    }
    if (viable && cand != points) try_candidate(cand);
  }
  out.points = std::move(points);
  out.ra = std::move(incumbent);
  return out;
}

Solution alternate(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                   const OrchestratorConfig& cfg, PolicyKind kind) {
  EDGEPART_REQUIRE(!devices.empty(), ValidationError, "no devices");
  EDGEPART_REQUIRE(total_bandwidth_hz > 0.0, ValidationError, "total bandwidth must be > 0");

  std::vector<int> points;
  if (cfg.initial_points) {
    points = *cfg.initial_points;
    EDGEPART_REQUIRE(points.size() == devices.size(), ValidationError,
                     "initial_points size mismatch");
  } else if (cfg.initial_point) {
    for (const DeviceScenario& dev : devices) {
      EDGEPART_REQUIRE(*cfg.initial_point >= 0 && *cfg.initial_point <= dev.profile->max_point(),
                       ValidationError, "initial_point out of range");
    }
    points.assign(devices.size(), *cfg.initial_point);
  } else {
    // Start candidates: energy-greedy priced at the full budget and at a fair
    // bandwidth share, plus the bandwidth-lightest decision as the
    // feasibility fallback. Cheapest feasible candidate wins.
    std::vector<std::vector<int>> candidates;
    candidates.push_back(greedy_points(devices, total_bandwidth_hz, total_bandwidth_hz));
    candidates.push_back(greedy_points(devices, total_bandwidth_hz,
                                       total_bandwidth_hz / static_cast<double>(devices.size())));
    {
      std::vector<int> lightest(devices.size(), 0);
      for (size_t n = 0; n < devices.size(); ++n) {
        double best_b = std::numeric_limits<double>::infinity();
        for (int m = 0; m <= devices[n].profile->max_point(); ++m) {
          const PointBounds pb = point_bounds(devices[n], m, total_bandwidth_hz);
          if (pb.min_deadline_s <= devices[n].deadline_s && pb.b_min_hz < best_b) {
            best_b = pb.b_min_hz;
            lightest[n] = m;
          }
        }
      }
      candidates.push_back(std::move(lightest));
    }
    double best_energy = std::numeric_limits<double>::infinity();
    std::optional<InfeasibleError> last_infeasible;
    for (const std::vector<int>& cand : candidates) {
      try {
        RaInstance inst{devices, cand, total_bandwidth_hz};
        const double e = solve_ra(inst, cfg.kernel_tol).energy_j;
        if (e < best_energy) {
          best_energy = e;
          points = cand;
        }
      } catch (const InfeasibleError& e) {
        last_infeasible = e;
      }
    }
    if (!std::isfinite(best_energy)) {
      if (last_infeasible) throw *last_infeasible;
      throw InfeasibleError("no feasible start found");
    }
  }

  Solution sol;
  sol.policy = kind;
  double prev_energy = std::numeric_limits<double>::infinity();
  std::optional<Allocation> warm;
  std::optional<RaSolution> incumbent;
  int outer = 0;
  for (int round = 0; round < 6; ++round) {
    // Alternating sweeps: allocation for the incumbent decision, then a
    // partitioning update at that allocation.
    while (outer < cfg.max_outer) {
      ++outer;
      RaInstance inst{devices, points, total_bandwidth_hz};
      RaSolution ra;
      try {
        ra = solve_ra(inst, cfg.kernel_tol, warm);
      } catch (const InfeasibleError&) {
        // A partitioning update can park a device exactly on its deadline,
        // leaving no strict interior for the next allocation solve. Keep the
        // incumbent solution; only a missing first solution is fatal.
        if (!incumbent) throw;
        break;
      }
      if (ra.energy_j > prev_energy + 1e-6) break;  // reject the step, keep previous
      sol.objective_trace.push_back(ra.energy_j);
      sol.decision = PartitionDecision::one_hot(devices, points);
      sol.allocation = ra.allocation;
      sol.expected_energy_j = ra.energy_j;
      incumbent = ra;
      const bool settled = std::abs(prev_energy - ra.energy_j) <
                           cfg.outer_tol * std::max(std::abs(prev_energy), 1e-12);
      prev_energy = ra.energy_j;
      if (settled) break;
      warm = ra.allocation;

      PccpResult pr = pccp_solve(devices, ra.allocation, cfg.pccp);
      sol.pccp_trace = pr.trace;
      std::vector<int> next(devices.size());
      for (size_t n = 0; n < devices.size(); ++n)
        next[n] = pr.decision.point_of(static_cast<int>(n));
      if (next == points) break;  // fixed point: the next sweep cannot change anything
      points = next;
    }
    if (!incumbent) break;
    // The partitioning step prices every point at the incumbent frequencies,
    // which can wall off points that only become feasible after retuning.
    // A single-switch scan over true allocation optima escapes such basins.
    SweepStep step = improvement_sweep(devices, total_bandwidth_hz, points, *incumbent,
                                       cfg.kernel_tol);
    if (!step.improved) break;
    points = std::move(step.points);
    warm = step.ra.allocation;
    incumbent = step.ra;
    if (step.ra.energy_j < sol.expected_energy_j) {
      sol.objective_trace.push_back(step.ra.energy_j);
      sol.decision = PartitionDecision::one_hot(devices, points);
      sol.allocation = step.ra.allocation;
      sol.expected_energy_j = step.ra.energy_j;
      prev_energy = step.ra.energy_j;
    }
  }
  sol.outer_iterations = outer;
  return sol;
}

}  // namespace

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::robust: return "robust";
    case PolicyKind::worst_case: return "worst_case";
    case PolicyKind::mean_value: return "mean_value";
    case PolicyKind::random_partition: return "random";
    case PolicyKind::exhaustive_optimal: return "exhaustive";
  }
  return "unknown";
}

PolicyKind policy_from_name(const std::string& name) {
  if (name == "robust") return PolicyKind::robust;
  if (name == "worst_case") return PolicyKind::worst_case;
  if (name == "mean_value") return PolicyKind::mean_value;
  if (name == "random") return PolicyKind::random_partition;
  if (name == "exhaustive") return PolicyKind::exhaustive_optimal;
  throw ConfigError("unknown policy: " + name);
}

std::vector<DeviceScenario> worst_case_devices(const std::vector<DeviceScenario>& devices) {
  return transformed(devices, true);
}

std::vector<DeviceScenario> mean_value_devices(const std::vector<DeviceScenario>& devices) {
  return transformed(devices, false);
}

Solution solve_robust(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                      const OrchestratorConfig& cfg) {
  return alternate(devices, total_bandwidth_hz, cfg, PolicyKind::robust);
}

Solution solve_worst_case(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                          const OrchestratorConfig& cfg) {
  Solution sol = alternate(worst_case_devices(devices), total_bandwidth_hz, cfg,
                           PolicyKind::worst_case);
  return sol;
}

Solution solve_mean_value(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                          const OrchestratorConfig& cfg) {
  return alternate(mean_value_devices(devices), total_bandwidth_hz, cfg, PolicyKind::mean_value);
}

std::vector<int> random_policy_candidates(const DeviceScenario& dev) {
  std::vector<int> out;
  const double raw = dev.profile->at(0).out_data_bits;
  for (int m = 1; m <= dev.profile->max_point(); ++m)
    if (dev.profile->at(m).out_data_bits < raw) out.push_back(m);
  return out;
}

Solution solve_random(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                      uint64_t seed, const OrchestratorConfig& cfg) {
  EDGEPART_REQUIRE(!devices.empty(), ValidationError, "no devices");
  std::vector<std::vector<int>> candidates;
  for (const DeviceScenario& dev : devices) {
    candidates.push_back(random_policy_candidates(dev));
    EDGEPART_REQUIRE(!candidates.back().empty(), ConfigError,
                     "random policy: no point uploads less than the raw data for device " +
                         std::to_string(dev.id));
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 1; attempt <= 50; ++attempt) {
    std::vector<int> points(devices.size());
    for (size_t n = 0; n < devices.size(); ++n) {
      const std::vector<int>& c = candidates[n];
      points[n] = c[static_cast<size_t>(rng() % c.size())];
    }
    try {
      RaInstance inst{devices, points, total_bandwidth_hz};
      RaSolution ra = solve_ra(inst, cfg.kernel_tol);
      Solution sol;
      sol.policy = PolicyKind::random_partition;
      sol.decision = PartitionDecision::one_hot(devices, points);
      sol.allocation = ra.allocation;
      sol.expected_energy_j = ra.energy_j;
      sol.outer_iterations = attempt;
      sol.objective_trace.push_back(ra.energy_j);
      return sol;
    } catch (const InfeasibleError&) {
      continue;
    }
  }
  throw InfeasibleError("random policy: no feasible draw in 50 attempts");
}

Solution solve_exhaustive(const std::vector<DeviceScenario>& devices, double total_bandwidth_hz,
                          const OrchestratorConfig& cfg) {
  EDGEPART_REQUIRE(!devices.empty(), ValidationError, "no devices");
  const size_t n_dev = devices.size();
  double space = 1.0;
  for (const DeviceScenario& dev : devices)
    space *= static_cast<double>(dev.profile->max_point() + 1);
  EDGEPART_REQUIRE(space <= 1.0e7, ConfigError,
                   "decision space too large for exhaustive search");

  const double inf = std::numeric_limits<double>::infinity();
  // Valid per-(device, point) relaxations: the bandwidth a point needs at
  // f_max, and the energy it costs when given the whole budget. Any feasible
  // joint allocation dominates both, so pruning on them is exact.
  std::vector<std::vector<double>> b_min(n_dev), e_lb(n_dev);
  for (size_t n = 0; n < n_dev; ++n) {
    for (int m = 0; m <= devices[n].profile->max_point(); ++m) {
      const PointBounds pb = point_bounds(devices[n], m, total_bandwidth_hz);
      b_min[n].push_back(pb.b_min_hz);
      e_lb[n].push_back(pb.energy_lb_j);
    }
  }
  std::vector<double> b_suffix(n_dev + 1, 0.0), e_suffix(n_dev + 1, 0.0);
  for (size_t n = n_dev; n-- > 0;) {
    b_suffix[n] = b_suffix[n + 1] + *std::min_element(b_min[n].begin(), b_min[n].end());
    e_suffix[n] = e_suffix[n + 1] + *std::min_element(e_lb[n].begin(), e_lb[n].end());
  }

  double best_energy = inf;
  std::vector<int> best_points;
  std::optional<Allocation> best_alloc;
  std::vector<int> points(n_dev, 0);

  // Lexicographic depth-first scan; the first strict improvement wins ties.
  std::function<void(size_t, double, double)> visit = [&](size_t n, double bsum, double esum) {
    if (n == n_dev) {
      try {
        RaInstance inst{devices, points, total_bandwidth_hz};
        RaSolution ra = solve_ra(inst, cfg.kernel_tol);
        if (ra.energy_j < best_energy) {
          best_energy = ra.energy_j;
          best_points = points;
          best_alloc = ra.allocation;
        }
      } catch (const InfeasibleError&) {
      }
      return;
    }
    const int top = devices[n].profile->max_point();
    for (int m = 0; m <= top; ++m) {
      const double nb = bsum + b_min[n][static_cast<size_t>(m)];
      const double ne = esum + e_lb[n][static_cast<size_t>(m)];
      if (!(nb + b_suffix[n + 1] <= total_bandwidth_hz)) continue;
      if (ne + e_suffix[n + 1] > best_energy) continue;
      points[n] = m;
      visit(n + 1, nb, ne);
    }
    points[n] = 0;
  };
  visit(0, 0.0, 0.0);

  if (!best_alloc) throw InfeasibleError("exhaustive search: no feasible decision");
  Solution sol;
  sol.policy = PolicyKind::exhaustive_optimal;
  sol.decision = PartitionDecision::one_hot(devices, best_points);
  sol.allocation = *best_alloc;
  sol.expected_energy_j = best_energy;
  sol.outer_iterations = 1;
  sol.objective_trace.push_back(best_energy);
  return sol;
}

Solution solve_policy(PolicyKind kind, const std::vector<DeviceScenario>& devices,
                      double total_bandwidth_hz, uint64_t seed, const OrchestratorConfig& cfg) {
  switch (kind) {
    case PolicyKind::robust: return solve_robust(devices, total_bandwidth_hz, cfg);
    case PolicyKind::worst_case: return solve_worst_case(devices, total_bandwidth_hz, cfg);
    case PolicyKind::mean_value: return solve_mean_value(devices, total_bandwidth_hz, cfg);
    case PolicyKind::random_partition: return solve_random(devices, total_bandwidth_hz, seed, cfg);
    case PolicyKind::exhaustive_optimal: return solve_exhaustive(devices, total_bandwidth_hz, cfg);
  }
  throw ConfigError("unknown policy kind");
}

std::string solution_to_json(const Solution& sol, const std::vector<DeviceScenario>& devices) {
  nlohmann::json j;
  j["policy"] = policy_name(sol.policy);
  j["expected_energy_j"] = sol.expected_energy_j;
  j["outer_iterations"] = sol.outer_iterations;
  j["objective_trace_j"] = sol.objective_trace;
  nlohmann::json devs = nlohmann::json::array();
  for (size_t n = 0; n < devices.size(); ++n) {
    nlohmann::json d;
    d["device"] = devices[n].id;
    d["point"] = sol.decision.point_of(static_cast<int>(n));
    d["bandwidth_hz"] = sol.allocation.bandwidth_hz[n];
    d["frequency_hz"] = sol.allocation.frequency_hz[n];
    devs.push_back(d);
  }
  j["devices"] = devs;
  return j.dump(2) + "\n";
}

}  // namespace edgepart
