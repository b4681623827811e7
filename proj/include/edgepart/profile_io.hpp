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

#include "edgepart/model.hpp"

namespace edgepart {

/// Fills the VM-side statistics a profiler cannot measure directly:
/// vm_mean = (w_M - w_m) / vm_throughput, vm_var = vm_var_ratio * max_m v_loc
/// for interior points (zero at both endpoints). Only NaN fields are touched.
void apply_default_vm_stats(DnnProfile& profile, double vm_var_ratio = 0.01);

/// Rebuilds the covariance matrix as diag(v_loc + v_vm).
void apply_diagonal_covariance(DnnProfile& profile);

/// Strict JSON parse (unknown fields rejected); validates before returning.
DnnProfile parse_profile_json(const std::string& text);
DnnProfile load_profile(const std::string& path);

/// Canonical JSON serialization; parse(write(p)) == p field for field.
std::string profile_to_json(const DnnProfile& profile);
void save_profile(const DnnProfile& profile, const std::string& path);

/// FNV-1a 64-bit hash of a byte string, used to checksum bundled fixtures.
uint64_t fnv1a64(const std::string& bytes);

}  // namespace edgepart
