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

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "edgepart/linalg.hpp"

namespace edgepart {

/// Twice-differentiable scalar function with analytic derivatives.
class SmoothFn {
 public:
  virtual ~SmoothFn() = default;
  /// Value at x; when grad is non-null it is overwritten with the gradient.
  virtual double eval(const Vec& x, Vec* grad) const = 0;
  /// h += scale * Hessian(x).
  virtual void add_hessian(const Vec& x, double scale, Mat& h) const = 0;
  double value(const Vec& x) const { return eval(x, nullptr); }
};

/// coeff^T x + constant.
class LinearFn : public SmoothFn {
 public:
  LinearFn(Vec coeff, double constant) : coeff_(std::move(coeff)), constant_(constant) {}
  double eval(const Vec& x, Vec* grad) const override {
    if (grad) *grad = coeff_;
    return dot(coeff_, x) + constant_;
  }
  void add_hessian(const Vec&, double, Mat&) const override {}

 private:
  Vec coeff_;
  double constant_;
};

/// Smooth convex program: minimize objective subject to g_i(x) <= 0 and
/// eq_a x = eq_c. Inequalities are evaluated in order during line search and
/// the first violated one short-circuits, so list cheap domain-guarding box
/// constraints before constraints whose evaluation needs the domain.
struct ConvexProgram {
  int n_vars = 0;
  std::shared_ptr<const SmoothFn> objective;
  std::vector<std::shared_ptr<const SmoothFn>> inequalities;
  Mat eq_a;  // zero rows when there are no equality constraints
  Vec eq_c;
  /// Marks which inequalities phase-I may violate while searching for a
  /// strictly feasible point; empty means all of them. Hard constraints must
  /// hold at the phase-I start point.
  std::vector<uint8_t> phase1_soft;
};

struct SolverOptions {
  double tol = 1e-8;           // target KKT residual / duality gap
  double mu0 = 1.0;            // initial barrier weight
  double mu_shrink = 10.0;     // mu <- mu / mu_shrink per stage
  double armijo = 0.25;        // line-search sufficient-decrease fraction
  double backtrack = 0.5;      // line-search step shrink
  int max_newton_per_stage = 120;
  /// Barrier floor. Problems with large penalty multipliers push the primal
  /// barrier Hessian out of double range as mu shrinks (terms ~lambda^2/mu);
  /// stopping at a floor and letting the active-set polish finish is far
  /// more accurate than grinding mu down. 0 keeps the gap-driven schedule.
  double mu_min = 0.0;
  /// Early exit once the objective drops below this (used by phase-I).
  double objective_stop = -std::numeric_limits<double>::infinity();
};

struct SolveReport {
  Vec x;
  double objective = 0.0;
  /// max of dual stationarity, primal violation and complementarity gap,
  /// recomputed at the returned point.
  double kkt_residual = std::numeric_limits<double>::infinity();
  int barrier_stages = 0;
  int newton_steps = 0;
  bool converged = false;
  bool stopped_early = false;  // objective_stop triggered
  std::string failure;         // nonempty on numerical failure
  Vec ineq_multipliers;
  Vec eq_multipliers;
  /// Objective value after each barrier stage (non-increasing on the path).
  Vec stage_objectives;
};

/// Log-barrier interior-point method with damped Newton centering. x0 must be
/// strictly feasible; if it is not, phase-I runs first and an InfeasibleError
/// is thrown when it proves infeasibility.
SolveReport solve(const ConvexProgram& prog, const Vec& x0, const SolverOptions& opts = {});

struct PhaseOneResult {
  bool feasible = false;
  Vec x;             // strictly feasible point when feasible
  double min_slack = 0.0;  // max_i g_i at the returned point (soft set)
};

/// Minimizes the worst soft-constraint violation from a hard-feasible start.
PhaseOneResult phase_one(const ConvexProgram& prog, const Vec& x0, const SolverOptions& opts = {});

/// True when every inequality is strictly negative at x.
bool strictly_feasible(const ConvexProgram& prog, const Vec& x);

}  // namespace edgepart
