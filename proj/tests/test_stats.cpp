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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "edgepart/error.hpp"
#include "edgepart/fixtures.hpp"
#include "edgepart/stats.hpp"

using namespace edgepart;

namespace {

TimingTrace from_cells(std::map<int, std::map<double, std::vector<double>>> cells) {
  TimingTrace t;
  t.f_min_hz = 1e8;
  t.f_max_hz = 1.3e9;
  t.cells = std::move(cells);
  return t;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("exact model data recovers g with zero residual") {
  TimingTrace trace = from_cells({{0, {{0.5e9, {0.2}}, {1.0e9, {0.1}}}}});
  const ThroughputFit fit = fit_throughput(trace, 0, 1e9);
  CHECK(fit.g == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(fit.residual_sq <= 1e-18);
}

TEST_CASE("noiseless recovery across random parameters") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const double w = 1e8 + 3e9 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    const double g = 2.0 + 300.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    TimingTrace trace;
    trace.f_min_hz = 1e8;
    trace.f_max_hz = 1.3e9;
    for (double f = 2e8; f <= 1.2e9; f += 2e8) trace.add(1, f, w / (g * f));
    const ThroughputFit fit = fit_throughput(trace, 1, w);
    CHECK(std::abs(fit.g - g) / g <= 1e-9);
  }
}

TEST_CASE("one percent multiplicative noise keeps the fit within one percent") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const double w = 5e8, g = 14.0;
    TimingTrace trace;
    trace.f_min_hz = 1e8;
    trace.f_max_hz = 1.3e9;
    for (double f = 2e8; f <= 1.2e9; f += 1e8) {
      const double noise = 1.0 + 0.01 * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
      trace.add(2, f, (w / (g * f)) * noise);
    }
    const ThroughputFit fit = fit_throughput(trace, 2, w);
    CHECK(std::abs(fit.g - g) / g <= 0.01);
  }
}

TEST_CASE("fit preconditions") {
  TimingTrace one_freq = from_cells({{0, {{1e9, {0.1, 0.11}}}}});
  CHECK_THROWS_AS(fit_throughput(one_freq, 0, 1e9), ValidationError);
  TimingTrace zeros = from_cells({{0, {{0.5e9, {0.0}}, {1e9, {0.0}}}}});
  CHECK_THROWS_AS(fit_throughput(zeros, 0, 1e9), ValidationError);
  TimingTrace ok = from_cells({{0, {{0.5e9, {0.2}}, {1e9, {0.1}}}}});
  CHECK_THROWS_AS(fit_throughput(ok, 0, 0.0), ValidationError);
  CHECK_THROWS_AS(fit_throughput(ok, 3, 1e9), ValidationError);  // missing point
}

TEST_CASE("bundled synthetic trace reproduces the regression targets") {
  const TimingTrace trace = alexnet_synthetic_trace();
  auto prof = builtin_profile("alexnet_xavier_nx_cpu");
  const ThroughputFit fit2 = fit_throughput(trace, 2, prof->at(2).cum_workload_flops);
  CHECK(fit2.residual_sq == doctest::Approx(9.7e-4).epsilon(1e-6));
  CHECK(fit2.g == doctest::Approx(prof->at(2).throughput_flops_per_cycle).epsilon(1e-7));
  const ThroughputFit fit1 = fit_throughput(trace, 1, prof->at(1).cum_workload_flops);
  CHECK(fit1.residual_sq == doctest::Approx(2.0e-4).epsilon(1e-6));
}

TEST_CASE("variance is the mean of per-frequency sample variances") {
  // two samples m +- d per cell give an unbiased variance of exactly 2 d^2
  auto cell = [](double mean, double var) {
    const double d = std::sqrt(var / 2.0);
    return std::vector<double>{mean - d, mean + d};
  };
  TimingTrace trace = from_cells({{1,
                                   {{2e8, cell(0.5, 2e-6)},
                                    {4e8, cell(0.25, 4e-6)},
                                    {8e8, cell(0.125, 6e-6)}}}});
  CHECK(estimate_variance(trace, 1) == doctest::Approx(4e-6).epsilon(1e-12));
  CHECK(max_variance_variant(trace, 1) == doctest::Approx(6e-6).epsilon(1e-12));

  TimingTrace constant = from_cells({{1, {{2e8, {0.5, 0.5, 0.5}}, {4e8, {0.25, 0.25}}}}});
  CHECK(estimate_variance(constant, 1) == 0.0);

  TimingTrace single = from_cells({{1, {{2e8, cell(0.5, 3e-6)}}}});
  CHECK(max_variance_variant(single, 1) == doctest::Approx(estimate_variance(single, 1)));

  TimingTrace thin = from_cells({{1, {{2e8, {0.5}}, {4e8, {0.25, 0.26}}}}});
  CHECK_THROWS_WITH_AS(estimate_variance(thin, 1),
                       doctest::Contains("point 1 @ 2e+08"), ValidationError);
}

TEST_CASE("gaussian cells recover the target variance") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> noise(0.0, 3e-3);  // sigma^2 = 9e-6
  TimingTrace trace;
  trace.f_min_hz = 1e8;
  trace.f_max_hz = 1.3e9;
  for (double f = 2e8; f <= 1.0e9; f += 2e8)
    for (int i = 0; i < 200; ++i) trace.add(1, f, 0.3 + noise(rng));
  CHECK(estimate_variance(trace, 1) == doctest::Approx(9e-6).epsilon(0.2));
}

TEST_CASE("covariance identities") {
  TimingTrace trace;
  trace.f_min_hz = 1e8;
  trace.f_max_hz = 1.3e9;
  std::mt19937_64 rng(5);
  for (double f : {2e8, 5e8, 9e8}) {
    for (int i = 0; i < 40; ++i) {
      const double t = 0.2 + 0.01 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
      trace.add(1, f, t);
      trace.add(2, f, t);        // identical series
      trace.add(3, f, 1.0 - t);  // anti-correlated
    }
  }
  const double var1 = estimate_variance(trace, 1);
  CHECK(estimate_covariance(trace, 1, 2) == doctest::Approx(var1).epsilon(1e-12));
  CHECK(estimate_covariance(trace, 1, 1) == doctest::Approx(var1).epsilon(1e-12));
  CHECK(estimate_covariance(trace, 1, 3) == doctest::Approx(-var1).epsilon(1e-12));
  CHECK(estimate_covariance(trace, 1, 2) == estimate_covariance(trace, 2, 1));
}

TEST_CASE("independent series have covariance within sampling error") {
  TimingTrace trace;
  trace.f_min_hz = 1e8;
  trace.f_max_hz = 1.3e9;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> na(0.2, 2e-3), nb(0.4, 2e-3);
  const int n = 400;
  for (double f : {3e8, 6e8}) {
    for (int i = 0; i < n; ++i) {
      trace.add(1, f, na(rng));
      trace.add(2, f, nb(rng));
    }
  }
  // standard error of the sample covariance of independents: s1*s2/sqrt(n-1)
  const double se = 2e-3 * 2e-3 / std::sqrt(static_cast<double>(n - 1));
  CHECK(std::abs(estimate_covariance(trace, 1, 2)) <= 3.0 * se);
}

TEST_CASE("unpaired covariance cells are rejected") {
  TimingTrace trace = from_cells({{1, {{2e8, {0.1, 0.2, 0.3}}}}, {2, {{2e8, {0.1, 0.2}}}}});
  CHECK_THROWS_AS(estimate_covariance(trace, 1, 2), ValidationError);
  TimingTrace freqs = from_cells({{1, {{2e8, {0.1, 0.2}}}}, {2, {{3e8, {0.1, 0.2}}}}});
  CHECK_THROWS_AS(estimate_covariance(freqs, 1, 2), ValidationError);
}

TEST_CASE("conservative variant dominates on the bundled trace") {
  const TimingTrace trace = alexnet_synthetic_trace();
  for (int m = 1; m <= 8; ++m)
    CHECK(max_variance_variant(trace, m) >= estimate_variance(trace, m));
}

TEST_CASE("trace csv round trip and error paths") {
  const TimingTrace trace = alexnet_synthetic_trace();
  const std::string path = temp_path("edgepart_trace_test.csv");
  save_trace_csv(trace, path);
  const TimingTrace loaded = load_trace_csv(path, trace.f_min_hz, trace.f_max_hz);
  REQUIRE(loaded.cells.size() == trace.cells.size());
  for (const auto& [m, by_freq] : trace.cells) {
    for (const auto& [f, samples] : by_freq) {
      const auto& got = loaded.cells.at(m).at(f);
      REQUIRE(got.size() == samples.size());
      for (size_t i = 0; i < samples.size(); ++i) CHECK(got[i] == samples[i]);
    }
  }
  std::filesystem::remove(path);

  const std::string bad = temp_path("edgepart_trace_bad.csv");
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("wrong,header,here\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_trace_csv(bad, 1e8, 1.3e9), ConfigError);
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("point,freq_hz,sample_s\n1,notanumber\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_trace_csv(bad, 1e8, 1.3e9), ConfigError);
  std::filesystem::remove(bad);
  CHECK_THROWS_AS(load_trace_csv(temp_path("edgepart_no_such_file.csv"), 1e8, 1.3e9), ConfigError);
}

TEST_CASE("trace validation checks the frequency window") {
  TimingTrace trace = from_cells({{1, {{5e7, {0.1, 0.2}}}}});  // below f_min
  CHECK_THROWS_AS(trace.validate(), ValidationError);
}
