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

#include "edgepart/model.hpp"

#include <cmath>
#include <sstream>

#include "edgepart/error.hpp"

namespace edgepart {

namespace {
constexpr double kLn2 = 0.6931471805599453;

std::string where(const std::string& name, int m) {
  std::ostringstream os;
  os << "profile '" << name << "' point " << m;
  return os.str();
}
}  // namespace

const BlockStats& DnnProfile::at(int m) const {
  EDGEPART_REQUIRE(m >= 0 && m <= num_blocks, ValidationError,
                   "partition point out of range: " + std::to_string(m));
  return points[static_cast<size_t>(m)];
}

double DnnProfile::wc_local_margin(int m) const {
  const BlockStats& p = at(m);
  if (p.wc_local_margin_s) return *p.wc_local_margin_s;
  return 3.0 * std::sqrt(p.local_var_s2);
}

double DnnProfile::wc_vm_margin(int m) const {
  const BlockStats& p = at(m);
  if (p.wc_vm_margin_s) return *p.wc_vm_margin_s;
  return 3.0 * std::sqrt(p.vm_var_s2);
}

void DnnProfile::validate() const {
  EDGEPART_REQUIRE(num_blocks >= 1, ValidationError, "profile needs at least one block");
  EDGEPART_REQUIRE(points.size() == static_cast<size_t>(num_blocks) + 1, ValidationError,
                   "profile '" + name + "': points size must be M+1");
  EDGEPART_REQUIRE(covariance_s2.rows() == num_blocks + 1 && covariance_s2.cols() == num_blocks + 1,
                   ValidationError, "profile '" + name + "': covariance must be (M+1)x(M+1)");
  const int top = num_blocks;
  for (int m = 0; m <= top; ++m) {
    const BlockStats& p = points[static_cast<size_t>(m)];
    EDGEPART_REQUIRE(p.point == m, ValidationError, where(name, m) + ": index mismatch");
    EDGEPART_REQUIRE(p.out_data_bits > 0.0, ValidationError,
                     where(name, m) + ": out_data_bits must be > 0");
    EDGEPART_REQUIRE(p.throughput_flops_per_cycle > 0.0, ValidationError,
                     where(name, m) + ": throughput must be > 0");
    EDGEPART_REQUIRE(p.local_var_s2 >= 0.0 && p.vm_var_s2 >= 0.0, ValidationError,
                     where(name, m) + ": variances must be >= 0");
    EDGEPART_REQUIRE(p.time_pad_s >= 0.0, ValidationError,
                     where(name, m) + ": time_pad_s must be >= 0");
    if (m > 0) {
      EDGEPART_REQUIRE(p.cum_workload_flops > points[static_cast<size_t>(m) - 1].cum_workload_flops,
                       ValidationError, where(name, m) + ": workload must be strictly increasing");
    }
  }
  EDGEPART_REQUIRE(points[0].cum_workload_flops == 0.0, ValidationError,
                   where(name, 0) + ": workload must be 0 (no local inference)");
  EDGEPART_REQUIRE(points[0].local_var_s2 == 0.0, ValidationError,
                   where(name, 0) + ": local variance must be 0");
  EDGEPART_REQUIRE(points[static_cast<size_t>(top)].vm_mean_s == 0.0, ValidationError,
                   where(name, top) + ": vm mean must be 0 (no edge inference)");
  EDGEPART_REQUIRE(points[static_cast<size_t>(top)].vm_var_s2 == 0.0, ValidationError,
                   where(name, top) + ": vm variance must be 0");
  for (int i = 0; i <= top; ++i) {
    for (int j = 0; j <= top; ++j) {
      EDGEPART_REQUIRE(covariance_s2(i, j) == covariance_s2(j, i), ValidationError,
                       "profile '" + name + "': covariance not symmetric at (" +
                           std::to_string(i) + "," + std::to_string(j) + ")");
    }
    EDGEPART_REQUIRE(covariance_s2(i, i) >= 0.0, ValidationError,
                     "profile '" + name + "': negative covariance diagonal");
    EDGEPART_REQUIRE(covariance_s2(0, i) == 0.0, ValidationError,
                     "profile '" + name + "': covariance row/col 0 must be zero");
    const BlockStats& p = points[static_cast<size_t>(i)];
    const double total_var = p.local_var_s2 + p.vm_var_s2;
    EDGEPART_REQUIRE(std::abs(covariance_s2(i, i) - total_var) <= 1e-12, ValidationError,
                     where(name, i) + ": covariance diagonal must equal v_loc + v_vm");
  }
}

void DeviceScenario::validate() const {
  EDGEPART_REQUIRE(profile != nullptr, ValidationError, "device has no profile");
  EDGEPART_REQUIRE(channel_gain > 0.0, ValidationError, "channel gain must be > 0");
  EDGEPART_REQUIRE(tx_power_w > 0.0, ValidationError, "tx power must be > 0");
  EDGEPART_REQUIRE(noise_psd_w_per_hz > 0.0, ValidationError, "noise psd must be > 0");
  EDGEPART_REQUIRE(f_min_hz > 0.0 && f_min_hz <= f_max_hz, ValidationError,
                   "need 0 < f_min <= f_max");
  EDGEPART_REQUIRE(kappa_w_per_cps3 >= 0.0, ValidationError, "kappa must be >= 0");
  EDGEPART_REQUIRE(deadline_s > 0.0, ValidationError, "deadline must be > 0");
  EDGEPART_REQUIRE(epsilon > 0.0 && epsilon < 1.0, ValidationError,
                   "risk level must lie in (0,1)");
}

PartitionDecision PartitionDecision::one_hot(const std::vector<DeviceScenario>& devices,
                                             const std::vector<int>& points) {
  EDGEPART_REQUIRE(devices.size() == points.size(), ValidationError,
                   "one_hot: points size must match device count");
  PartitionDecision d;
  d.x.resize(devices.size());
  for (size_t n = 0; n < devices.size(); ++n) {
    const int top = devices[n].profile->max_point();
    EDGEPART_REQUIRE(points[n] >= 0 && points[n] <= top, ValidationError,
                     "one_hot: point out of range for device " + std::to_string(devices[n].id));
    d.x[n].assign(static_cast<size_t>(top) + 1, 0.0);
    d.x[n][static_cast<size_t>(points[n])] = 1.0;
  }
  return d;
}

void PartitionDecision::validate(bool binary) const {
  for (size_t n = 0; n < x.size(); ++n) {
    double sum = 0.0;
    for (double v : x[n]) {
      EDGEPART_REQUIRE(v >= 0.0 && v <= 1.0, ValidationError,
                       "decision entry outside [0,1] for device row " + std::to_string(n));
      if (binary) {
        EDGEPART_REQUIRE(v == 0.0 || v == 1.0, ValidationError,
                         "decision not binary for device row " + std::to_string(n));
      }
      sum += v;
    }
    EDGEPART_REQUIRE(std::abs(sum - 1.0) <= 1e-9, ValidationError,
                     "decision row " + std::to_string(n) + " does not sum to 1");
  }
}

bool PartitionDecision::is_binary(double tol) const {
  for (const Vec& row : x)
    for (double v : row)
      if (std::min(std::abs(v), std::abs(v - 1.0)) > tol) return false;
  return true;
}

int PartitionDecision::point_of(int device) const {
  const Vec& row = x[static_cast<size_t>(device)];
  int best = 0;
  for (size_t m = 1; m < row.size(); ++m)
    if (row[m] > row[static_cast<size_t>(best)]) best = static_cast<int>(m);
  return best;
}

void Allocation::validate(const std::vector<DeviceScenario>& devices,
                          double total_bandwidth_hz) const {
  EDGEPART_REQUIRE(bandwidth_hz.size() == devices.size() && frequency_hz.size() == devices.size(),
                   ValidationError, "allocation size mismatch");
  double sum = 0.0;
  for (size_t n = 0; n < devices.size(); ++n) {
    EDGEPART_REQUIRE(bandwidth_hz[n] > 0.0, ValidationError,
                     "bandwidth must be > 0 for device " + std::to_string(devices[n].id));
    sum += bandwidth_hz[n];
    const double f = frequency_hz[n];
    const double ftol = 1e-9 * devices[n].f_max_hz;
    EDGEPART_REQUIRE(f >= devices[n].f_min_hz - ftol && f <= devices[n].f_max_hz + ftol,
                     ValidationError, "frequency out of range for device " + std::to_string(devices[n].id));
  }
  EDGEPART_REQUIRE(sum <= total_bandwidth_hz * (1.0 + 1e-9), ValidationError,
                   "total bandwidth exceeded");
}

double spectral_efficiency(const DeviceScenario& dev, double bandwidth_hz) {
  EDGEPART_REQUIRE(bandwidth_hz > 0.0, ValidationError, "bandwidth must be > 0");
  const double snr = dev.tx_power_w * dev.channel_gain / (bandwidth_hz * dev.noise_psd_w_per_hz);
  return std::log1p(snr) / kLn2;
}

double offload_time_for_bits(const DeviceScenario& dev, double d_bits, double bandwidth_hz) {
  EDGEPART_REQUIRE(d_bits >= 0.0, ValidationError, "payload must be >= 0 bits");
  if (d_bits == 0.0) return 0.0;
  const double rate = bandwidth_hz * spectral_efficiency(dev, bandwidth_hz);
  return d_bits / rate;
}

double offload_time(const DeviceScenario& dev, int m, double bandwidth_hz) {
  return offload_time_for_bits(dev, dev.profile->at(m).out_data_bits, bandwidth_hz);
}

double offload_energy(const DeviceScenario& dev, int m, double bandwidth_hz) {
  return dev.tx_power_w * offload_time(dev, m, bandwidth_hz);
}

double expected_local_time(const DeviceScenario& dev, int m, double f_hz) {
  const double ftol = 1e-9 * dev.f_max_hz;
  EDGEPART_REQUIRE(f_hz >= dev.f_min_hz - ftol && f_hz <= dev.f_max_hz + ftol, ValidationError,
                   "frequency outside device range");
  const BlockStats& p = dev.profile->at(m);
  return p.cum_workload_flops / (p.throughput_flops_per_cycle * f_hz);
}

double expected_local_energy(const DeviceScenario& dev, int m, double f_hz) {
  const double ftol = 1e-9 * dev.f_max_hz;
  EDGEPART_REQUIRE(f_hz >= dev.f_min_hz - ftol && f_hz <= dev.f_max_hz + ftol, ValidationError,
                   "frequency outside device range");
  const BlockStats& p = dev.profile->at(m);
  return dev.kappa_w_per_cps3 * (p.cum_workload_flops / p.throughput_flops_per_cycle) * f_hz * f_hz;
}

double expected_total_time(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz) {
  const BlockStats& p = dev.profile->at(m);
  return expected_local_time(dev, m, f_hz) + offload_time(dev, m, bandwidth_hz) + p.vm_mean_s +
         p.time_pad_s;
}

double expected_total_energy(const DeviceScenario& dev, int m, double bandwidth_hz, double f_hz) {
  return expected_local_energy(dev, m, f_hz) + offload_energy(dev, m, bandwidth_hz);
}

OffloadTimeDerivs offload_time_derivs(const DeviceScenario& dev, double d_bits,
                                      double bandwidth_hz) {
  OffloadTimeDerivs out;
  if (d_bits == 0.0) return out;
  const double b = bandwidth_hz;
  const double q = dev.tx_power_w * dev.channel_gain / dev.noise_psd_w_per_hz;
  // J(b) = b * ln(1 + q/b); t_off = d*ln2 / J(b).
  const double j = b * std::log1p(q / b);
  const double jp = std::log1p(q / b) - q / (b + q);
  const double jpp = -q * q / (b * (b + q) * (b + q));
  const double dln2 = d_bits * kLn2;
  out.t = dln2 / j;
  out.dt_db = -dln2 * jp / (j * j);
  out.d2t_db2 = dln2 * (2.0 * jp * jp - j * jpp) / (j * j * j);
  return out;
}

}  // namespace edgepart
