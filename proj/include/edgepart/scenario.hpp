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

#include "edgepart/mc.hpp"
#include "edgepart/model.hpp"
#include "edgepart/policies.hpp"

namespace edgepart {

/// Scenario generator settings: devices dropped uniformly at random in a
/// square cell with the edge node at its center.
struct ScenarioConfig {
  int n_devices = 1;
  double area_half_width_m = 200.0;
  double bandwidth_hz = 1.0e7;
  std::string profile;  // builtin name or path, applied to every device
  std::optional<std::vector<std::string>> profile_per_device;
  double epsilon = 0.05;
  std::optional<Vec> epsilon_per_device;
  double deadline_s = 0.0;
  std::optional<Vec> deadline_per_device_s;
  double tx_power_w = 1.0;
  double noise_psd_w_per_hz = 3.9810717055349694e-21;  // -174 dBm/Hz
  double min_distance_m = 1.0;
  uint64_t master_seed = 1;

  void validate() const;
};

/// Free-space placement plus the log-distance path loss 38 + 30*log10(r) dB.
double path_loss_db(double distance_m);
double channel_gain_from_distance(double distance_m);

std::vector<DeviceScenario> generate_scenario(const ScenarioConfig& cfg);

/// Strict parse of the scenario section (unknown fields rejected).
ScenarioConfig parse_scenario_config(const std::string& json_text);

struct RunOptions {
  std::string config_path;
  std::string command;  // solve | sweep | fit | evaluate
  std::optional<uint64_t> seed;
  int jobs = 1;
  std::string out_dir = "out";
};

/// CLI entry point behind the flag parser. Exit codes: 0 success,
/// 1 infeasible, 2 configuration error.
int run_cli(const RunOptions& opts);

}  // namespace edgepart
