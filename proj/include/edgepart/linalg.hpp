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

#include <cstddef>
#include <vector>

namespace edgepart {

using Vec = std::vector<double>;

/// Dense row-major matrix. Problem sizes here stay in the hundreds, so a
/// plain contiguous buffer with unblocked factorizations is all we need.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  double* row(int i) { return a_.data() + static_cast<size_t>(i) * cols_; }
  const double* row(int i) const { return a_.data() + static_cast<size_t>(i) * cols_; }

  void set_zero() { std::fill(a_.begin(), a_.end(), 0.0); }
  void resize(int rows, int cols) {
    rows_ = rows;
    cols_ = cols;
    a_.assign(static_cast<size_t>(rows) * cols, 0.0);
  }

  /// this += s * v v^T (v has rows() entries; matrix must be square).
  void add_outer(const Vec& v, double s);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

/// In-place Cholesky factorization of a symmetric positive-definite matrix
/// (lower triangle). Returns false if a non-positive pivot is met.
bool cholesky_factor(Mat& a);

/// Solves L L^T x = b given the factor from cholesky_factor; b is overwritten.
void cholesky_solve(const Mat& l, Vec& b);

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations, ascending.
/// The input is symmetrized as (A + A^T)/2 before iterating.
Vec symmetric_eigenvalues(Mat a, int max_sweeps = 64);

/// Solves a general square system in place via LU with partial pivoting
/// (destroys a). Returns false on a (numerically) singular matrix.
bool lu_solve(Mat a, Vec& b);

double dot(const Vec& a, const Vec& b);
double norm_inf(const Vec& a);
double norm2(const Vec& a);

/// y = A x.
void mat_vec(const Mat& a, const Vec& x, Vec& y);
/// y = A^T x.
void mat_tvec(const Mat& a, const Vec& x, Vec& y);

}  // namespace edgepart
