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

#include "edgepart/stats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "edgepart/error.hpp"

namespace edgepart {

namespace {

std::string cell_name(int point, double freq_hz) {
  std::ostringstream os;
  os << "point " << point << " @ " << freq_hz << " Hz";
  return os.str();
}

const std::map<double, std::vector<double>>& point_cells(const TimingTrace& trace, int point) {
  auto it = trace.cells.find(point);
  EDGEPART_REQUIRE(it != trace.cells.end() && !it->second.empty(), ValidationError,
                   "trace has no samples for point " + std::to_string(point));
  return it->second;
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double unbiased_variance(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

std::vector<double> TimingTrace::frequencies(int point) const {
  std::vector<double> out;
  auto it = cells.find(point);
  if (it == cells.end()) return out;
  for (const auto& [f, samples] : it->second) out.push_back(f);
  return out;
}

void TimingTrace::validate() const {
  EDGEPART_REQUIRE(f_min_hz > 0.0 && f_min_hz <= f_max_hz, ValidationError,
                   "trace needs 0 < f_min <= f_max");
  EDGEPART_REQUIRE(!cells.empty(), ValidationError, "trace is empty");
  for (const auto& [m, by_freq] : cells) {
    for (const auto& [f, samples] : by_freq) {
      EDGEPART_REQUIRE(f >= f_min_hz && f <= f_max_hz, ValidationError,
                       "trace frequency outside [f_min, f_max] at " + cell_name(m, f));
      EDGEPART_REQUIRE(!samples.empty(), ValidationError, "empty cell at " + cell_name(m, f));
      for (double s : samples)
        EDGEPART_REQUIRE(std::isfinite(s), ValidationError,
                         "non-finite sample at " + cell_name(m, f));
    }
  }
}

ThroughputFit fit_throughput(const TimingTrace& trace, int point, double workload_flops) {
  EDGEPART_REQUIRE(workload_flops > 0.0, ValidationError, "fit requires workload > 0");
  const auto& by_freq = point_cells(trace, point);
  EDGEPART_REQUIRE(by_freq.size() >= 2, ValidationError,
                   "fit requires samples at >= 2 distinct frequencies for point " +
                       std::to_string(point));
  // Flatten to (w/f, t) pairs.
  std::vector<double> c, t;
  double sum_c = 0.0, sum_t = 0.0;
  for (const auto& [f, samples] : by_freq) {
    for (double s : samples) {
      c.push_back(workload_flops / f);
      t.push_back(s);
      sum_c += c.back();
      sum_t += s;
    }
  }
  EDGEPART_REQUIRE(sum_t > 0.0, ValidationError, "fit requires positive total time");

  auto objective = [&](double g) {
    double acc = 0.0;
    for (size_t i = 0; i < c.size(); ++i) {
      const double r = t[i] - c[i] / g;
      acc += r * r;
    }
    return acc;
  };

  // Ratio-of-means initializer, bracketed wide; golden-section to 1e-10 rel.
  const double g0 = sum_c / sum_t;
  double lo = g0 / 1.0e2;
  double hi = g0 * 1.0e2;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-10 * g0) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = objective(x2);
    }
  }
  ThroughputFit fit;
  fit.g = 0.5 * (lo + hi);
  fit.residual_sq = objective(fit.g);
  return fit;
}

double estimate_variance(const TimingTrace& trace, int point) {
  const auto& by_freq = point_cells(trace, point);
  double acc = 0.0;
  for (const auto& [f, samples] : by_freq) {
    EDGEPART_REQUIRE(samples.size() >= 2, ValidationError,
                     "variance needs >= 2 samples at " + cell_name(point, f));
    acc += unbiased_variance(samples);
  }
  return acc / static_cast<double>(by_freq.size());
}

double estimate_covariance(const TimingTrace& trace, int point_a, int point_b) {
  const auto& cells_a = point_cells(trace, point_a);
  const auto& cells_b = point_cells(trace, point_b);
  EDGEPART_REQUIRE(cells_a.size() == cells_b.size(), ValidationError,
                   "covariance: frequency sets differ between points");
  double acc = 0.0;
  auto ita = cells_a.begin();
  auto itb = cells_b.begin();
  for (; ita != cells_a.end(); ++ita, ++itb) {
    EDGEPART_REQUIRE(ita->first == itb->first, ValidationError,
                     "covariance: frequency sets differ between points");
    const std::vector<double>& a = ita->second;
    const std::vector<double>& b = itb->second;
    EDGEPART_REQUIRE(a.size() == b.size(), ValidationError,
                     "covariance: unpaired sample counts at " + cell_name(point_a, ita->first));
    EDGEPART_REQUIRE(a.size() >= 2, ValidationError,
                     "covariance needs >= 2 samples at " + cell_name(point_a, ita->first));
    const double ma = sample_mean(a);
    const double mb = sample_mean(b);
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    acc += s / static_cast<double>(a.size() - 1);
  }
  return acc / static_cast<double>(cells_a.size());
}

double max_variance_variant(const TimingTrace& trace, int point) {
  const auto& by_freq = point_cells(trace, point);
  double best = 0.0;
  bool first = true;
  for (const auto& [f, samples] : by_freq) {
    EDGEPART_REQUIRE(samples.size() >= 2, ValidationError,
                     "variance needs >= 2 samples at " + cell_name(point, f));
    const double v = unbiased_variance(samples);
    best = first ? v : std::max(best, v);
    first = false;
  }
  return best;
}

TimingTrace load_trace_csv(const std::string& path, double f_min_hz, double f_max_hz) {
  std::ifstream in(path);
  EDGEPART_REQUIRE(in.good(), ConfigError, "cannot open trace file: " + path);
  TimingTrace trace;
  trace.f_min_hz = f_min_hz;
  trace.f_max_hz = f_max_hz;
  std::string line;
  EDGEPART_REQUIRE(static_cast<bool>(std::getline(in, line)), ConfigError,
                   "trace file is empty: " + path);
  EDGEPART_REQUIRE(line == "point,freq_hz,sample_s", ConfigError,
                   "trace file must start with header 'point,freq_hz,sample_s': " + path);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int point = 0;
    double freq = 0.0, sample = 0.0;
    const int got = std::sscanf(line.c_str(), "%d,%lf,%lf", &point, &freq, &sample);
    EDGEPART_REQUIRE(got == 3, ConfigError,
                     "malformed trace row at line " + std::to_string(lineno) + " of " + path);
    trace.add(point, freq, sample);
  }
  trace.validate();
  return trace;
}

void save_trace_csv(const TimingTrace& trace, const std::string& path) {
  std::ofstream out(path);
  EDGEPART_REQUIRE(out.good(), ConfigError, "cannot write trace file: " + path);
  out << "point,freq_hz,sample_s\n";
  char buf[96];
  for (const auto& [m, by_freq] : trace.cells) {
    for (const auto& [f, samples] : by_freq) {
      for (double s : samples) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.17g\n", m, f, s);
        out << buf;
      }
    }
  }
}

}  // namespace edgepart
