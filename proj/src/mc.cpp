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

#include "edgepart/mc.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "edgepart/error.hpp"

namespace edgepart {

namespace {

constexpr double kPi = 3.141592653589793;

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }
double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// One stage draw with the requested family, mean mu and variance var.
double draw_stage(SamplingKind kind, double mu, double var, Rng& rng) {
  if (var <= 0.0) return std::max(mu, 0.0);
  const double sd = std::sqrt(var);
  switch (kind) {
    case SamplingKind::gaussian_truncated: {
      for (int i = 0; i < 10000; ++i) {
        const double x = mu + sd * rng.normal();
        if (x >= 0.0) return x;
      }
      return 0.0;
    }
    case SamplingKind::two_point:
      return std::max(0.0, (rng.uniform() < 0.5) ? mu - sd : mu + sd);
    case SamplingKind::empirical_trace:
      throw ValidationError("empirical stage draw requested without trace data");
  }
  throw ValidationError("unknown sampling kind");
}

}  // namespace

SamplingKind sampling_kind_from_name(const std::string& name) {
  if (name == "gaussian_truncated") return SamplingKind::gaussian_truncated;
  if (name == "empirical_trace") return SamplingKind::empirical_trace;
  if (name == "two_point") return SamplingKind::two_point;
  throw ConfigError("unknown sampling model: " + name);
}

std::string sampling_kind_name(SamplingKind kind) {
  switch (kind) {
    case SamplingKind::gaussian_truncated: return "gaussian_truncated";
    case SamplingKind::empirical_trace: return "empirical_trace";
    case SamplingKind::two_point: return "two_point";
  }
  return "unknown";
}

uint64_t derive_seed(uint64_t master, uint64_t index) {
  uint64_t state = master ^ (0xd1b54a32d192ed03ull * (index + 1));
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4568bull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

StageDraw sample_stage_times(const DeviceScenario& dev, int m, double f_hz,
                             const SamplingModel& model, int device_index, Rng& rng) {
  StageDraw out;
  if (model.kind == SamplingKind::empirical_trace) {
    EDGEPART_REQUIRE(model.empirical != nullptr &&
                         static_cast<size_t>(device_index) < model.empirical->per_device.size(),
                     ValidationError, "trace replay model has no samples for this device");
    const auto& samples = model.empirical->per_device[static_cast<size_t>(device_index)];
    EDGEPART_REQUIRE(!samples.empty(), ValidationError, "trace replay with empty sample set");
    const auto& pick = samples[static_cast<size_t>(rng.raw() % samples.size())];
    out.t_loc = pick[0];
    out.t_vm = pick[1];
    return out;
  }
  const BlockStats& p = dev.profile->at(m);
  const double mu_loc = expected_local_time(dev, m, f_hz);
  out.t_loc = draw_stage(model.kind, mu_loc, p.local_var_s2, rng);
  out.t_vm = draw_stage(model.kind, p.vm_mean_s, p.vm_var_s2, rng);
  return out;
}

double sample_total_time(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz,
                         const SamplingModel& model, int device_index, Rng& rng) {
  const StageDraw draw = sample_stage_times(dev, m, f_hz, model, device_index, rng);
  return draw.t_loc + offload_time(dev, m, bandwidth_hz) + draw.t_vm;
}

EvaluationReport evaluate(const Solution& solution, const std::vector<DeviceScenario>& devices,
                          const SamplingModel& model, int n_samples, uint64_t seed,
                          const std::string& scenario_id) {
  EDGEPART_REQUIRE(n_samples >= 1000, ValidationError, "evaluation needs n_samples >= 1000");
  EDGEPART_REQUIRE(solution.allocation.bandwidth_hz.size() == devices.size(), ValidationError,
                   "solution does not match the scenario");
  EvaluationReport rep;
  rep.policy = policy_name(solution.policy);
  rep.scenario_id = scenario_id;
  rep.n_samples = n_samples;
  rep.expected_energy_j = solution.expected_energy_j;
  rep.seed = seed;
  rep.violation_per_device.assign(devices.size(), 0.0);

  double energy_acc = 0.0;
  uint64_t violations_total = 0;
  for (size_t n = 0; n < devices.size(); ++n) {
    const DeviceScenario& dev = devices[n];
    const int m = solution.decision.point_of(static_cast<int>(n));
    const double b = solution.allocation.bandwidth_hz[n];
    const double f = solution.allocation.frequency_hz[n];
    const double t_off = offload_time(dev, m, b);
    const double e_off = dev.tx_power_w * t_off;
    const double f3 = f * f * f;
    const BlockStats& p = dev.profile->at(m);
    if (model.kind == SamplingKind::gaussian_truncated) {
      // Truncation at 0 distorts the stage moments once the mean is within
      // three sigmas of zero; report the analytic renormalized moments.
      auto check = [&](double mu, double var, const char* stage) {
        if (var <= 0.0 || mu >= 3.0 * std::sqrt(var)) return;
        const double sd = std::sqrt(var);
        const double a = -mu / sd;
        const double z = 1.0 - std_normal_cdf(a);
        const double mean_trunc = mu + sd * std_normal_pdf(a) / z;
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "device %d %s stage: truncated mean %.6g vs %.6g (mean < 3 sigma)", dev.id,
                      stage, mean_trunc, mu);
        rep.warnings.push_back(buf);
      };
      check(expected_local_time(dev, m, f), p.local_var_s2, "local");
      check(p.vm_mean_s, p.vm_var_s2, "vm");
    }

    Rng rng(derive_seed(seed, static_cast<uint64_t>(n)));
    uint64_t violations = 0;
    double dev_energy = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      const StageDraw draw = sample_stage_times(dev, m, f, model, static_cast<int>(n), rng);
      const double total = draw.t_loc + t_off + draw.t_vm;
      if (total > dev.deadline_s) ++violations;
      dev_energy += dev.kappa_w_per_cps3 * f3 * draw.t_loc + e_off;
    }
    rep.violation_per_device[n] =
        static_cast<double>(violations) / static_cast<double>(n_samples);
    violations_total += violations;
    energy_acc += dev_energy / static_cast<double>(n_samples);
  }
  rep.violation_aggregate = static_cast<double>(violations_total) /
                            (static_cast<double>(n_samples) * static_cast<double>(devices.size()));
  rep.mean_realized_energy_j = energy_acc;
  return rep;
}

namespace {

struct SweepCell {
  PolicyKind policy;
  double epsilon;     // nan -> keep scenario value
  double deadline_s;  // nan -> keep scenario value
  uint64_t index;
};

std::string format_row(const std::string& scenario, const std::string& policy, double eps,
                       double deadline_s, const std::string& device, double viol, double energy,
                       double expected, int n_samples, uint64_t seed) {
  char buf[360];
  std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%.12g,%s,%.12g,%.12g,%.12g,%d,%llu\n",
                scenario.c_str(), policy.c_str(), eps, deadline_s * 1e3, device.c_str(), viol,
                energy, expected, n_samples, static_cast<unsigned long long>(seed));
  return buf;
}

}  // namespace

std::string sweep_csv(const std::vector<DeviceScenario>& base_devices, double total_bandwidth_hz,
                      const SweepSpec& spec, const std::string& scenario_id) {
  EDGEPART_REQUIRE(!spec.policies.empty(), ConfigError, "sweep needs at least one policy");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Vec eps_grid = spec.epsilon_grid.empty() ? Vec{nan} : spec.epsilon_grid;
  Vec d_grid = spec.deadline_grid_s.empty() ? Vec{nan} : spec.deadline_grid_s;

  std::vector<SweepCell> cells;
  uint64_t idx = 0;
  for (PolicyKind policy : spec.policies)
    for (double eps : eps_grid)
      for (double d : d_grid) cells.push_back({policy, eps, d, idx++});

  std::vector<std::string> chunks(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t c = next.fetch_add(1);
      if (c >= cells.size()) break;
      const SweepCell& cell = cells[c];
      std::vector<DeviceScenario> devices = base_devices;
      for (DeviceScenario& dev : devices) {
        if (!std::isnan(cell.epsilon)) dev.epsilon = cell.epsilon;
        if (!std::isnan(cell.deadline_s)) dev.deadline_s = cell.deadline_s;
      }
      const double eps_out = std::isnan(cell.epsilon) ? base_devices.front().epsilon : cell.epsilon;
      const double d_out =
          std::isnan(cell.deadline_s) ? base_devices.front().deadline_s : cell.deadline_s;
      const uint64_t solve_seed = derive_seed(spec.master_seed, 2 * cell.index);
      const uint64_t eval_seed = derive_seed(spec.master_seed, 2 * cell.index + 1);
      std::ostringstream rows;
      try {
        const Solution sol = solve_policy(cell.policy, devices, total_bandwidth_hz, solve_seed,
                                          spec.orchestrator);
        const EvaluationReport rep =
            evaluate(sol, devices, spec.model, spec.n_samples, eval_seed, scenario_id);
        for (size_t n = 0; n < devices.size(); ++n) {
          rows << format_row(scenario_id, policy_name(cell.policy), eps_out, d_out,
                             std::to_string(devices[n].id), rep.violation_per_device[n],
                             rep.mean_realized_energy_j, rep.expected_energy_j, spec.n_samples,
                             eval_seed);
        }
        rows << format_row(scenario_id, policy_name(cell.policy), eps_out, d_out, "all",
                           rep.violation_aggregate, rep.mean_realized_energy_j,
                           rep.expected_energy_j, spec.n_samples, eval_seed);
      } catch (const Error&) {
        rows << format_row(scenario_id, policy_name(cell.policy), eps_out, d_out, "all", nan, nan,
                           nan, spec.n_samples, eval_seed);
      }
      chunks[c] = rows.str();
    }
  };
  const size_t jobs = static_cast<size_t>(std::max(1, spec.jobs));
  if (jobs == 1 || cells.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < std::min(jobs, cells.size()); ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::string csv =
      "scenario,policy,epsilon,deadline_ms,device,violation_prob,energy_j,expected_energy_j,"
      "n_samples,seed\n";
  for (const std::string& chunk : chunks) csv += chunk;
  return csv;
}

}  // namespace edgepart
