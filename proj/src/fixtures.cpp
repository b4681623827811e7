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

#include "edgepart/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

#include "edgepart/error.hpp"
#include "edgepart/profile_io.hpp"

namespace edgepart {

namespace {

struct ProfileTable {
  const char* name;
  double f_min_ghz;
  double f_max_ghz;
  double kappa;
  std::vector<double> d_mb;    // per point, raw data at 0, result data at M
  std::vector<double> w_gf;    // cumulative GFLOPs, 0 at point 0
  std::vector<double> g;       // FLOPs/cycle (point 0 unused)
  std::vector<double> v_ms2;   // device-stage variance, 0 at point 0
};

// Per-block measurements of the three reference DNN/hardware pairs.
const ProfileTable kTables[] = {
    {"alexnet_xavier_nx_cpu",
     0.1,
     1.2,
     0.8e-27,
     {0.574, 0.74, 0.18, 0.53, 0.12, 0.25, 0.17, 0.04, 0.001},
     {0.0, 0.1407, 0.1411, 0.5891, 0.5894, 0.8137, 1.3122, 1.3123, 1.4214},
     {1.0, 6.8994, 6.3283, 13.6064, 13.1861, 14.6624, 16.4237, 16.1219, 7.1037},
     {0.0, 37.341, 43.084, 59.616, 63.942, 74.801, 95.073, 98.876, 105.886}},
    {"resnet152_xavier_nx_gpu",
     0.2,
     0.8,
     2.8e-27,
     {0.574, 3.06, 0.77, 1.53, 0.38, 0.19, 0.19, 0.19, 0.1, 0.001},
     {0.0, 0.2392, 1.4864, 3.6585, 5.3099, 9.9984, 13.9389, 17.8794, 21.9228, 23.1064},
     {1.0, 315.4525, 309.6695, 323.7640, 329.8090, 325.6815, 324.1615, 322.7340, 318.6457,
      307.6753},
     {0.0, 0.097, 1.310, 5.677, 13.934, 14.076, 15.881, 23.408, 32.256, 32.727}},
    {"vit_b32_nano_gpu",
     0.1,
     0.8,
     3.2e-27,
     {0.574, 0.146, 0.146, 0.146, 0.146, 0.146, 0.001},
     {0.0, 3.0954, 3.8114, 5.2435, 7.3916, 8.1077, 8.8253},
     {1.0, 171.967, 174.837, 175.369, 181.168, 178.191, 135.983},
     {0.0, 11.059, 18.931, 33.337, 65.814, 75.867, 153.434}},
};

// The worst-case baseline needs stage upper bounds; the measured maxima are
// not published, so the fixtures ship mean + 6*sqrt(var) margins (marked
// synthetic). Six sigma keeps the bound above every sigma_n*sqrt(v) term for
// risk levels down to 0.03, where sigma = 5.686.
constexpr double kWorstCaseSigmas = 6.0;

DnnProfile build_profile(const ProfileTable& t) {
  DnnProfile p;
  p.name = t.name;
  p.num_blocks = static_cast<int>(t.d_mb.size()) - 1;
  p.default_f_min_hz = t.f_min_ghz * kHzPerGhz;
  p.default_f_max_hz = t.f_max_ghz * kHzPerGhz;
  p.default_kappa_w_per_cps3 = t.kappa;
  p.synthetic_vm_stats = true;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t m = 0; m < t.d_mb.size(); ++m) {
    BlockStats b;
    b.point = static_cast<int>(m);
    b.out_data_bits = t.d_mb[m] * kBitsPerMb;
    b.cum_workload_flops = t.w_gf[m] * kFlopsPerGflop;
    b.throughput_flops_per_cycle = t.g[m];
    b.local_var_s2 = t.v_ms2[m] * kS2PerMs2;
    b.vm_mean_s = nan;
    b.vm_var_s2 = nan;
    p.points.push_back(b);
  }
  apply_default_vm_stats(p);
  for (BlockStats& b : p.points) {
    b.wc_local_margin_s = kWorstCaseSigmas * std::sqrt(b.local_var_s2);
    b.wc_vm_margin_s = kWorstCaseSigmas * std::sqrt(b.vm_var_s2);
  }
  apply_diagonal_covariance(p);
  p.validate();
  return p;
}

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4568bull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<std::string> builtin_profile_names() {
  std::vector<std::string> names;
  for (const ProfileTable& t : kTables) names.push_back(t.name);
  return names;
}

std::shared_ptr<const DnnProfile> builtin_profile(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const DnnProfile>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  for (const ProfileTable& t : kTables) {
    if (name == t.name) {
      auto p = std::make_shared<const DnnProfile>(build_profile(t));
      cache[name] = p;
      return p;
    }
  }
  throw ConfigError("unknown builtin profile: " + name);
}

std::shared_ptr<const DnnProfile> resolve_profile(const std::string& name_or_path) {
  for (const ProfileTable& t : kTables)
    if (name_or_path == t.name) return builtin_profile(name_or_path);
  return std::make_shared<const DnnProfile>(load_profile(name_or_path));
}

TimingTrace synthetic_point_trace(double workload_flops, double g, const std::vector<double>& freqs_hz,
                                  int samples_per_freq, double residual_sq_target, uint64_t seed,
                                  double f_min_hz, double f_max_hz) {
  EDGEPART_REQUIRE(freqs_hz.size() >= 2 && samples_per_freq >= 1, ValidationError,
                   "synthetic trace needs >= 2 frequencies");
  const size_t n = freqs_hz.size() * static_cast<size_t>(samples_per_freq);
  // Regressor of the model t = (w/f) * (1/g); noise orthogonal to it leaves
  // the least-squares optimum at the true g with residual exactly the noise
  // energy.
  std::vector<double> u(n), e(n);
  uint64_t state = seed;
  size_t idx = 0;
  for (double f : freqs_hz) {
    for (int s = 0; s < samples_per_freq; ++s, ++idx) {
      u[idx] = workload_flops / f;
      e[idx] = 2.0 * uniform01(state) - 1.0;
    }
  }
  double eu = 0.0, uu = 0.0;
  for (size_t i = 0; i < n; ++i) {
    eu += e[i] * u[i];
    uu += u[i] * u[i];
  }
  double ee = 0.0;
  for (size_t i = 0; i < n; ++i) {
    e[i] -= (eu / uu) * u[i];
    ee += e[i] * e[i];
  }
  EDGEPART_REQUIRE(ee > 0.0, NumericError, "degenerate synthetic noise");
  const double scale = std::sqrt(residual_sq_target / ee);

  TimingTrace trace;
  trace.f_min_hz = f_min_hz;
  trace.f_max_hz = f_max_hz;
  idx = 0;
  for (double f : freqs_hz) {
    for (int s = 0; s < samples_per_freq; ++s, ++idx) {
      trace.add(0, f, workload_flops / (g * f) + scale * e[idx]);
    }
  }
  return trace;
}

TimingTrace alexnet_synthetic_trace() {
  auto prof = builtin_profile("alexnet_xavier_nx_cpu");
  std::vector<double> freqs;
  for (int i = 2; i <= 12; ++i) freqs.push_back(static_cast<double>(i) * 1e8);  // 0.2..1.2 GHz
  TimingTrace trace;
  trace.f_min_hz = prof->default_f_min_hz;
  trace.f_max_hz = prof->default_f_max_hz;
  for (int m = 1; m <= prof->max_point(); ++m) {
    const BlockStats& b = prof->at(m);
    // Regression targets for the mean-fit residual: the measured values for
    // the first two points, noise at the scale of the stage variance beyond.
    double target;
    if (m == 1) {
      target = 2.0e-4;
    } else if (m == 2) {
      target = 9.7e-4;
    } else {
      target = b.local_var_s2 * static_cast<double>(freqs.size()) * 2.0;
    }
    TimingTrace one = synthetic_point_trace(b.cum_workload_flops, b.throughput_flops_per_cycle,
                                            freqs, 2, target, 0x5eedull + static_cast<uint64_t>(m),
                                            trace.f_min_hz, trace.f_max_hz);
    trace.cells[m] = one.cells[0];
  }
  trace.validate();
  return trace;
}

std::vector<std::string> bundle_fixtures(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  for (const std::string& name : builtin_profile_names()) {
    const std::string body = profile_to_json(*builtin_profile(name));
    const std::string path = (fs::path(dir) / (name + ".json")).string();
    {
      std::ofstream out(path);
      EDGEPART_REQUIRE(out.good(), ConfigError, "cannot write fixture: " + path);
      out << body;
    }
    written.push_back(path);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(body)));
    const std::string sum_path = path + ".fnv1a";
    std::ofstream sum(sum_path);
    sum << buf << "  " << name << ".json\n";
    written.push_back(sum_path);
  }
  const std::string trace_path = (fs::path(dir) / "alexnet_xavier_nx_cpu_trace.csv").string();
  save_trace_csv(alexnet_synthetic_trace(), trace_path);
  written.push_back(trace_path);
  return written;
}

}  // namespace edgepart
