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

#include "edgepart/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "edgepart/error.hpp"

namespace edgepart {

void Mat::add_outer(const Vec& v, double s) {
  const int n = rows_;
  for (int i = 0; i < n; ++i) {
    const double si = s * v[static_cast<size_t>(i)];
    if (si == 0.0) continue;
    double* ri = row(i);
    for (int j = 0; j < n; ++j) ri[j] += si * v[static_cast<size_t>(j)];
  }
}

bool cholesky_factor(Mat& a) {
  const int n = a.rows();
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      const double* ri = a.row(i);
      const double* rj = a.row(j);
      for (int k = 0; k < j; ++k) s -= ri[k] * rj[k];
      a(i, j) = s / ljj;
    }
  }
  return true;
}

void cholesky_solve(const Mat& l, Vec& b) {
  const int n = l.rows();
  for (int i = 0; i < n; ++i) {
    double s = b[static_cast<size_t>(i)];
    const double* ri = l.row(i);
    for (int k = 0; k < i; ++k) s -= ri[k] * b[static_cast<size_t>(k)];
    b[static_cast<size_t>(i)] = s / ri[i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[static_cast<size_t>(i)];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * b[static_cast<size_t>(k)];
    b[static_cast<size_t>(i)] = s / l(i, i);
  }
}

Vec symmetric_eigenvalues(Mat a, int max_sweeps) {
  const int n = a.rows();
  EDGEPART_REQUIRE(n == a.cols(), ValidationError, "eigenvalues: matrix not square");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vec ev(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

bool lu_solve(Mat a, Vec& b) {
  const int n = a.rows();
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) return false;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(piv)]);
    }
    const double akk = a(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double l = a(i, k) / akk;
      if (l == 0.0) continue;
      a(i, k) = l;
      for (int j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
      b[static_cast<size_t>(i)] -= l * b[static_cast<size_t>(k)];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[static_cast<size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * b[static_cast<size_t>(j)];
    b[static_cast<size_t>(i)] = s / a(i, i);
  }
  return true;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

void mat_vec(const Mat& a, const Vec& x, Vec& y) {
  y.assign(static_cast<size_t>(a.rows()), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* ri = a.row(i);
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += ri[j] * x[static_cast<size_t>(j)];
    y[static_cast<size_t>(i)] = s;
  }
}

void mat_tvec(const Mat& a, const Vec& x, Vec& y) {
  y.assign(static_cast<size_t>(a.cols()), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* ri = a.row(i);
    const double xi = x[static_cast<size_t>(i)];
    if (xi == 0.0) continue;
    for (int j = 0; j < a.cols(); ++j) y[static_cast<size_t>(j)] += ri[j] * xi;
  }
}

}  // namespace edgepart
