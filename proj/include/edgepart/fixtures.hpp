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

#include <memory>
#include <string>
#include <vector>

#include "edgepart/model.hpp"
#include "edgepart/stats.hpp"

namespace edgepart {

/// Names of the profiles measured on real hardware and shipped with the
/// library: alexnet_xavier_nx_cpu, resnet152_xavier_nx_gpu, vit_b32_nano_gpu.
std::vector<std::string> builtin_profile_names();

/// Shared immutable instance of a bundled profile; throws ConfigError on an
/// unknown name.
std::shared_ptr<const DnnProfile> builtin_profile(const std::string& name);

/// Resolves a profile reference: a builtin name, else a path to a JSON file.
std::shared_ptr<const DnnProfile> resolve_profile(const std::string& name_or_path);

/// Synthetic timing trace for one point: model times w/(g*f) plus a noise
/// vector orthogonalized against the regressor w/f and scaled so the refit
/// residual equals residual_sq_target exactly (and the fitted g equals g).
TimingTrace synthetic_point_trace(double workload_flops, double g, const std::vector<double>& freqs_hz,
                                  int samples_per_freq, double residual_sq_target, uint64_t seed,
                                  double f_min_hz, double f_max_hz);

/// Synthetic frequency-scaling trace covering every point of the AlexNet
/// profile; point 2 is scaled to the 9.7e-4 s^2 residual regression target.
TimingTrace alexnet_synthetic_trace();

/// Writes the bundled profiles (plus FNV-1a checksum files) and the synthetic
/// AlexNet trace into a directory. Returns the paths written.
std::vector<std::string> bundle_fixtures(const std::string& dir);

}  // namespace edgepart
