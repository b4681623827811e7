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

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "edgepart/model.hpp"
#include "edgepart/policies.hpp"

namespace edgepart {

enum class SamplingKind {
  gaussian_truncated,  // normal per stage, truncated at 0 and renormalized
  empirical_trace,     // replay of recorded (device stage, vm stage) pairs
  two_point            // mean +- sqrt(var), each with probability 1/2
};

SamplingKind sampling_kind_from_name(const std::string& name);
std::string sampling_kind_name(SamplingKind kind);

/// Recorded stage-time pairs per device for trace replay.
struct EmpiricalSamples {
  std::vector<std::vector<std::array<double, 2>>> per_device;  // (t_loc, t_vm)
};

struct SamplingModel {
  SamplingKind kind = SamplingKind::gaussian_truncated;
  std::shared_ptr<const EmpiricalSamples> empirical;  // required for trace replay
};

/// Splits independent deterministic substreams off one master seed.
uint64_t derive_seed(uint64_t master, uint64_t index);

/// Deterministic RNG wrapper with a portable normal sampler.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  double uniform();  // [0, 1)
  double normal();   // standard normal (Box-Muller)
  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// One random draw of the two uncertain stages of a device at point m.
struct StageDraw {
  double t_loc = 0.0;
  double t_vm = 0.0;
};
StageDraw sample_stage_times(const DeviceScenario& dev, int m, double f_hz,
                             const SamplingModel& model, int device_index, Rng& rng);

/// Device-stage draw + deterministic upload time + VM-stage draw.
double sample_total_time(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz,
                         const SamplingModel& model, int device_index, Rng& rng);

struct EvaluationReport {
  std::string policy;
  std::string scenario_id;
  int n_samples = 0;
  Vec violation_per_device;
  double violation_aggregate = 0.0;
  double mean_realized_energy_j = 0.0;
  double expected_energy_j = 0.0;
  uint64_t seed = 0;
  std::vector<std::string> warnings;  // truncation moment distortion notes
};

/// Empirical deadline-violation frequencies (strict T > D) and realized
/// energy of a solved policy under a sampling model; n_samples >= 1000.
EvaluationReport evaluate(const Solution& solution, const std::vector<DeviceScenario>& devices,
                          const SamplingModel& model, int n_samples, uint64_t seed,
                          const std::string& scenario_id = "scenario");

struct SweepSpec {
  std::vector<PolicyKind> policies;
  Vec epsilon_grid;      // empty -> keep the scenario's risk levels
  Vec deadline_grid_s;   // empty -> keep the scenario's deadlines
  int n_samples = 100000;
  SamplingModel model;
  uint64_t master_seed = 1;
  int jobs = 1;
  OrchestratorConfig orchestrator;
};

/// Cross-product runner: policies x epsilon grid x deadline grid, one solved
/// and evaluated cell each, with per-cell seeds derived from the master seed.
/// Returns the CSV text (header + one row per device per cell + an aggregate
/// row); cell failures are recorded in-row as nan.
std::string sweep_csv(const std::vector<DeviceScenario>& base_devices, double total_bandwidth_hz,
                      const SweepSpec& spec, const std::string& scenario_id = "scenario");

}  // namespace edgepart
