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

#include "edgepart/convex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "edgepart/error.hpp"

namespace edgepart {

namespace {

/// Evaluates a function of the first `inner_n` coordinates of a longer vector.
class LiftedFn : public SmoothFn {
 public:
  LiftedFn(std::shared_ptr<const SmoothFn> inner, int inner_n, int outer_n)
      : inner_(std::move(inner)), inner_n_(inner_n), outer_n_(outer_n) {}

  double eval(const Vec& x, Vec* grad) const override {
    const Vec xin(x.begin(), x.begin() + inner_n_);
    if (!grad) return inner_->eval(xin, nullptr);
    Vec gin;
    const double v = inner_->eval(xin, &gin);
    grad->assign(static_cast<size_t>(outer_n_), 0.0);
    std::copy(gin.begin(), gin.end(), grad->begin());
    return v;
  }

  void add_hessian(const Vec& x, double scale, Mat& h) const override {
    const Vec xin(x.begin(), x.begin() + inner_n_);
    Mat hin(inner_n_, inner_n_);
    inner_->add_hessian(xin, scale, hin);
    for (int i = 0; i < inner_n_; ++i)
      for (int j = 0; j < inner_n_; ++j) h(i, j) += hin(i, j);
  }

 private:
  std::shared_ptr<const SmoothFn> inner_;
  int inner_n_;
  int outer_n_;
};

/// g(x) - s with s the last coordinate (phase-I softened constraint).
class SoftenedFn : public SmoothFn {
 public:
  SoftenedFn(std::shared_ptr<const SmoothFn> inner, int inner_n, int outer_n)
      : lifted_(std::move(inner), inner_n, outer_n), outer_n_(outer_n) {}

  double eval(const Vec& x, Vec* grad) const override {
    const double v = lifted_.eval(x, grad) - x[static_cast<size_t>(outer_n_) - 1];
    if (grad) (*grad)[static_cast<size_t>(outer_n_) - 1] -= 1.0;
    return v;
  }
  void add_hessian(const Vec& x, double scale, Mat& h) const override {
    lifted_.add_hessian(x, scale, h);
  }

 private:
  LiftedFn lifted_;
  int outer_n_;
};

bool feasible_at(const ConvexProgram& prog, const Vec& x) {
  for (const auto& g : prog.inequalities) {
    const double gi = g->value(x);
    if (!(gi < 0.0) || !std::isfinite(gi)) return false;  // NaN rejects too
  }
  return true;
}

double barrier_value(const ConvexProgram& prog, const Vec& x, double mu, bool* ok) {
  double phi = prog.objective->value(x);
  *ok = std::isfinite(phi);
  if (!*ok) return phi;
  for (const auto& g : prog.inequalities) {
    const double gi = g->value(x);
    if (!(gi < 0.0) || !std::isfinite(gi)) {
      *ok = false;
      return phi;
    }
    phi -= mu * std::log(-gi);
  }
  return phi;
}

/// Multiplier-based scaling of the dual residual (the usual interior-point
/// convention): residuals are meaningful relative to the size of the
/// multipliers when penalties blow the duals up.
double dual_scale(const Vec& lambda, const Vec& nu) {
  double sum = 0.0;
  for (double v : lambda) sum += std::abs(v);
  for (double v : nu) sum += std::abs(v);
  const double count = static_cast<double>(lambda.size() + nu.size());
  if (count == 0.0) return 1.0;
  return std::max(100.0, sum / count) / 100.0;
}

struct KktWorkspace {
  Mat h;           // barrier Hessian (kept for refinement)
  Mat factor;      // Cholesky factor
  Vec grad_phi;
  Vec r_pri;
  Vec dx, w;
  std::vector<Vec> hinv_at;  // H^{-1} A^T columns
  Mat schur_factor;
};

/// Factors H (ridged if needed) and solves
///   [H A^T; A 0] [dx; w] = [-grad_phi; -r_pri]
/// with one pass of iterative refinement. Returns false if H resists
/// factorization entirely.
bool kkt_solve(const ConvexProgram& prog, KktWorkspace& ws) {
  const int n = prog.n_vars;
  const int p = prog.eq_a.rows();
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, ws.h(i, i));
  double ridge = 0.0;
  for (int attempt = 0;; ++attempt) {
    ws.factor = ws.h;
    if (ridge > 0.0)
      for (int i = 0; i < n; ++i) ws.factor(i, i) += ridge;
    if (cholesky_factor(ws.factor)) break;
    if (attempt >= 14) return false;
    ridge = (ridge == 0.0) ? 1e-14 * std::max(1.0, max_diag) : ridge * 100.0;
  }

  if (p > 0) {
    ws.hinv_at.assign(static_cast<size_t>(p), Vec());
    Mat schur(p, p);
    for (int r = 0; r < p; ++r) {
      Vec col(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j) col[static_cast<size_t>(j)] = prog.eq_a(r, j);
      cholesky_solve(ws.factor, col);
      ws.hinv_at[static_cast<size_t>(r)] = std::move(col);
    }
    for (int r = 0; r < p; ++r)
      for (int s = 0; s < p; ++s) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += prog.eq_a(r, j) * ws.hinv_at[static_cast<size_t>(s)][static_cast<size_t>(j)];
        schur(r, s) = acc;
      }
    ws.schur_factor = schur;
    for (int attempt = 0;; ++attempt) {
      if (cholesky_factor(ws.schur_factor)) break;
      if (attempt >= 6) return false;
      ws.schur_factor = schur;
      for (int r = 0; r < p; ++r) ws.schur_factor(r, r) += std::pow(10.0, attempt - 14);
    }
  }

  auto solve_once = [&](const Vec& rhs_x, const Vec& rhs_eq, Vec& out_dx, Vec& out_w) {
    out_dx = rhs_x;
    cholesky_solve(ws.factor, out_dx);
    if (p == 0) {
      out_w.clear();
      return;
    }
    out_w.assign(static_cast<size_t>(p), 0.0);
    for (int r = 0; r < p; ++r) {
      double acc = -rhs_eq[static_cast<size_t>(r)];
      for (int j = 0; j < n; ++j) acc += prog.eq_a(r, j) * out_dx[static_cast<size_t>(j)];
      out_w[static_cast<size_t>(r)] = acc;
    }
    cholesky_solve(ws.schur_factor, out_w);
    for (int r = 0; r < p; ++r)
      for (int j = 0; j < n; ++j)
        out_dx[static_cast<size_t>(j)] -= ws.hinv_at[static_cast<size_t>(r)][static_cast<size_t>(j)] * out_w[static_cast<size_t>(r)];
  };

  // Solve H dx + A^T w = -grad_phi with A dx = -r_pri (solve_once's rhs_eq is
  // the target value of A dx).
  Vec rhs_x(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) rhs_x[static_cast<size_t>(j)] = -ws.grad_phi[static_cast<size_t>(j)];
  Vec rhs_eq(static_cast<size_t>(p));
  for (int r = 0; r < p; ++r) rhs_eq[static_cast<size_t>(r)] = -ws.r_pri[static_cast<size_t>(r)];
  solve_once(rhs_x, rhs_eq, ws.dx, ws.w);

  for (int pass = 0; pass < 2; ++pass) {  // refinement against the exact H
    Vec res_x(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      double acc = ws.grad_phi[static_cast<size_t>(i)];
      const double* hi = ws.h.row(i);
      for (int j = 0; j < n; ++j) acc += hi[j] * ws.dx[static_cast<size_t>(j)];
      for (int r = 0; r < p; ++r) acc += prog.eq_a(r, i) * ws.w[static_cast<size_t>(r)];
      res_x[static_cast<size_t>(i)] = -acc;
    }
    Vec res_eq(static_cast<size_t>(p));
    for (int r = 0; r < p; ++r) {
      double acc = ws.r_pri[static_cast<size_t>(r)];
      for (int j = 0; j < n; ++j) acc += prog.eq_a(r, j) * ws.dx[static_cast<size_t>(j)];
      res_eq[static_cast<size_t>(r)] = -acc;  // correction target: A ddx = -(A dx + r_pri)
    }
    if (norm_inf(res_x) < 1e-14 && norm_inf(res_eq) < 1e-14) break;
    Vec ddx, dw;
    solve_once(res_x, res_eq, ddx, dw);
    for (int j = 0; j < n; ++j) ws.dx[static_cast<size_t>(j)] += ddx[static_cast<size_t>(j)];
    for (int r = 0; r < p; ++r) ws.w[static_cast<size_t>(r)] += dw[static_cast<size_t>(r)];
  }
  return true;
}

struct Residuals {
  double stat = 0.0;      // scaled dual stationarity
  double primal = 0.0;    // max inequality violation
  double eq = 0.0;        // max equality violation
  double gap = 0.0;       // complementarity, relative to 1+|f|
  double combined() const { return std::max({stat, primal, eq, gap}); }
};

Residuals kkt_residuals(const ConvexProgram& prog, const Vec& x, const Vec& lambda,
                        const Vec& nu) {
  const int n = prog.n_vars;
  const int m = static_cast<int>(prog.inequalities.size());
  const int p = prog.eq_a.rows();
  Vec stat;
  const double fval = prog.objective->eval(x, &stat);
  Vec grad(static_cast<size_t>(n));
  Residuals out;
  double comp = 0.0;
  for (int i = 0; i < m; ++i) {
    const double gi = prog.inequalities[static_cast<size_t>(i)]->eval(x, &grad);
    out.primal = std::max(out.primal, gi);
    const double li = lambda[static_cast<size_t>(i)];
    comp += std::abs(li * gi);
    for (int j = 0; j < n; ++j) stat[static_cast<size_t>(j)] += li * grad[static_cast<size_t>(j)];
  }
  for (int r = 0; r < p; ++r) {
    double acc = -prog.eq_c[static_cast<size_t>(r)];
    for (int j = 0; j < n; ++j) {
      stat[static_cast<size_t>(j)] += prog.eq_a(r, j) * nu[static_cast<size_t>(r)];
      acc += prog.eq_a(r, j) * x[static_cast<size_t>(j)];
    }
    out.eq = std::max(out.eq, std::abs(acc));
  }
  out.stat = norm_inf(stat) / dual_scale(lambda, nu);
  out.gap = comp / (1.0 + std::abs(fval));
  return out;
}

/// Newton polish on the active-set KKT system. The barrier gets close; one or
/// two Newton steps on stationarity + active constraints push the residual to
/// machine precision when the active set is identified correctly. Rejected
/// (returning false) whenever the polished point is not clearly better.
bool polish(const ConvexProgram& prog, double mu_final, Vec& x, Vec& lambda, Vec& nu,
            Residuals& res) {
  const int n = prog.n_vars;
  const int m = static_cast<int>(prog.inequalities.size());
  const int p = prog.eq_a.rows();
  std::vector<int> candidates;
  const double thresh = std::sqrt(mu_final);
  for (int i = 0; i < m; ++i)
    if (lambda[static_cast<size_t>(i)] >= thresh) candidates.push_back(i);
  // Degenerate vertices carry more active constraints than degrees of
  // freedom; keep a linearly independent subset, strongest multipliers first
  // (the rest stay active with multiplier zero).
  std::stable_sort(candidates.begin(), candidates.end(), [&](int i, int j) {
    return lambda[static_cast<size_t>(i)] > lambda[static_cast<size_t>(j)];
  });
  std::vector<Vec> basis;  // orthogonalized gradients incl. equality rows
  Vec gbuf(static_cast<size_t>(n));
  auto try_extend = [&](Vec v) {
    const double orig = std::max(norm2(v), 1e-300);
    for (const Vec& b : basis) {
      const double c = dot(v, b);
      for (int j = 0; j < n; ++j) v[static_cast<size_t>(j)] -= c * b[static_cast<size_t>(j)];
    }
    const double rem = norm2(v);
    if (rem <= 1e-8 * orig) return false;
    for (int j = 0; j < n; ++j) v[static_cast<size_t>(j)] /= rem;
    basis.push_back(std::move(v));
    return true;
  };
  for (int r = 0; r < p; ++r) {
    Vec row(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) row[static_cast<size_t>(j)] = prog.eq_a(r, j);
    try_extend(std::move(row));
  }
  std::vector<int> active;
  for (int i : candidates) {
    if (static_cast<int>(active.size()) + p >= n) break;
    prog.inequalities[static_cast<size_t>(i)]->eval(x, &gbuf);
    if (try_extend(gbuf)) active.push_back(i);
  }
  std::sort(active.begin(), active.end());
  const bool debug = std::getenv("EDGEPART_SOLVER_DEBUG") != nullptr;

  Vec xp, lp, np;
  Vec grad(static_cast<size_t>(n));
  std::vector<int> dropped;  // never re-add, so add/drop cannot cycle
  // Outer rounds implement standard active-set refinement: a negative
  // multiplier means that constraint should not have been held as an
  // equality (drop it); a violated non-active constraint must be held (add).
  for (int round = 0; round < 10; ++round) {
    const int a = static_cast<int>(active.size());
    xp = x;
    lp.assign(static_cast<size_t>(a), 0.0);
    for (int k = 0; k < a; ++k)
      lp[static_cast<size_t>(k)] = lambda[static_cast<size_t>(active[static_cast<size_t>(k)])];
    np = nu;

    const int dim = n + a + p;
    Mat kkt(dim, dim);
    Vec rhs(static_cast<size_t>(dim));
    bool singular = false;
    for (int iter = 0; iter < 3 && !singular; ++iter) {
      kkt.set_zero();
      prog.objective->eval(xp, &grad);
      prog.objective->add_hessian(xp, 1.0, kkt);  // top-left block, in place
      Vec stat = grad;
      // Tiny ridge keeps the system solvable when some coordinate is flat
      // (zero curvature and no active constraint); bias ~1e-10 relative.
      for (int j = 0; j < n; ++j) kkt(j, j) += 1e-10 * (1.0 + std::abs(kkt(j, j)));
      for (int k = 0; k < a; ++k) {
        const int i = active[static_cast<size_t>(k)];
        const double gi = prog.inequalities[static_cast<size_t>(i)]->eval(xp, &grad);
        const double li = lp[static_cast<size_t>(k)];
        for (int j = 0; j < n; ++j) {
          stat[static_cast<size_t>(j)] += li * grad[static_cast<size_t>(j)];
          kkt(j, n + k) = grad[static_cast<size_t>(j)];
          kkt(n + k, j) = grad[static_cast<size_t>(j)];
        }
        prog.inequalities[static_cast<size_t>(i)]->add_hessian(xp, li, kkt);
        rhs[static_cast<size_t>(n + k)] = -gi;
      }
      for (int r = 0; r < p; ++r) {
        double acc = -prog.eq_c[static_cast<size_t>(r)];
        for (int j = 0; j < n; ++j) {
          stat[static_cast<size_t>(j)] += prog.eq_a(r, j) * np[static_cast<size_t>(r)];
          kkt(j, n + a + r) = prog.eq_a(r, j);
          kkt(n + a + r, j) = prog.eq_a(r, j);
          acc += prog.eq_a(r, j) * xp[static_cast<size_t>(j)];
        }
        rhs[static_cast<size_t>(n + a + r)] = -acc;
      }
      for (int j = 0; j < n; ++j) rhs[static_cast<size_t>(j)] = -stat[static_cast<size_t>(j)];

      Vec step = rhs;
      if (!lu_solve(kkt, step)) {
        singular = true;
        break;
      }
      for (int j = 0; j < n; ++j) xp[static_cast<size_t>(j)] += step[static_cast<size_t>(j)];
      for (int k = 0; k < a; ++k) lp[static_cast<size_t>(k)] += step[static_cast<size_t>(n + k)];
      for (int r = 0; r < p; ++r) np[static_cast<size_t>(r)] += step[static_cast<size_t>(n + a + r)];
    }
    if (singular) {
      if (debug) std::fprintf(stderr, "polish: singular KKT (a=%d p=%d n=%d)\n", a, p, n);
      return false;
    }
    int worst = -1;
    double worst_l = -1e-9;
    for (int k = 0; k < a; ++k) {
      if (lp[static_cast<size_t>(k)] < worst_l) {
        worst_l = lp[static_cast<size_t>(k)];
        worst = k;
      }
    }
    if (worst >= 0) {
      if (round == 9 || a == 0) {
        if (debug) std::fprintf(stderr, "polish: negative multiplier %.2e persists\n", worst_l);
        return false;
      }
      dropped.push_back(active[static_cast<size_t>(worst)]);
      active.erase(active.begin() + worst);
      continue;
    }
    // Multipliers consistent; pull in the most violated left-out constraint.
    int add = -1;
    double add_g = 1e-9;
    for (int i = 0; i < m; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      if (std::find(dropped.begin(), dropped.end(), i) != dropped.end()) continue;
      const double gi = prog.inequalities[static_cast<size_t>(i)]->value(xp);
      if (gi > add_g) {
        add_g = gi;
        add = i;
      }
    }
    if (add < 0) break;  // primal feasible as well
    if (round == 9 || static_cast<int>(active.size()) + p >= n) {
      if (debug) std::fprintf(stderr, "polish: violated constraint persists (%.2e)\n", add_g);
      return false;
    }
    active.insert(std::lower_bound(active.begin(), active.end(), add), add);
  }

  Vec lam_full(static_cast<size_t>(m), 0.0);
  for (size_t k = 0; k < active.size(); ++k) {
    lam_full[static_cast<size_t>(active[k])] = std::max(0.0, lp[k]);
  }
  const Residuals polished = kkt_residuals(prog, xp, lam_full, np);
  if (debug)
    std::fprintf(stderr, "polish: a=%zu stat=%.2e pri=%.2e eq=%.2e gap=%.2e (was %.2e)\n",
                 active.size(), polished.stat, polished.primal, polished.eq, polished.gap,
                 res.combined());
  if (polished.primal > 1e-9 || polished.combined() >= res.combined()) return false;
  x = xp;
  lambda = lam_full;
  nu = np;
  res = polished;
  return true;
}

}  // namespace

bool strictly_feasible(const ConvexProgram& prog, const Vec& x) { return feasible_at(prog, x); }

SolveReport solve(const ConvexProgram& prog, const Vec& x0, const SolverOptions& opts) {
  EDGEPART_REQUIRE(prog.objective != nullptr, ValidationError, "program has no objective");
  EDGEPART_REQUIRE(x0.size() == static_cast<size_t>(prog.n_vars), ValidationError,
                   "start point dimension mismatch");

  Vec x = x0;
  if (!feasible_at(prog, x)) {
    PhaseOneResult p1 = phase_one(prog, x0, opts);
    if (!p1.feasible) {
      throw InfeasibleError("program infeasible (phase-I min slack " +
                            std::to_string(p1.min_slack) + ")");
    }
    x = p1.x;
  }

  const int n = prog.n_vars;
  const int m = static_cast<int>(prog.inequalities.size());
  const int p = prog.eq_a.rows();

  SolveReport rep;
  KktWorkspace ws;
  ws.h.resize(n, n);
  ws.r_pri.assign(static_cast<size_t>(p), 0.0);
  Vec grad_obj, grad_i;
  Vec x_trial(static_cast<size_t>(n));
  Vec lambda(static_cast<size_t>(m), 0.0);

  double mu = opts.mu0;
  bool failed = false;
  std::string failure;

  while (true) {
    double last_dual = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int it = 0; it < opts.max_newton_per_stage; ++it) {
      ws.h.set_zero();
      double phi = prog.objective->eval(x, &grad_obj);
      prog.objective->add_hessian(x, 1.0, ws.h);
      ws.grad_phi = grad_obj;
      bool domain_ok = true;
      double lambda_sum = 0.0;
      for (int i = 0; i < m; ++i) {
        const double gi = prog.inequalities[static_cast<size_t>(i)]->eval(x, &grad_i);
        if (!(gi < 0.0)) {
          domain_ok = false;
          break;
        }
        phi -= mu * std::log(-gi);
        const double li = mu / (-gi);
        lambda[static_cast<size_t>(i)] = li;
        lambda_sum += li;
        for (int j = 0; j < n; ++j) ws.grad_phi[static_cast<size_t>(j)] += li * grad_i[static_cast<size_t>(j)];
        ws.h.add_outer(grad_i, li / (-gi));
        prog.inequalities[static_cast<size_t>(i)]->add_hessian(x, li, ws.h);
      }
      if (!domain_ok) {
        failed = true;
        failure = "iterate left the feasible domain";
        break;
      }
      for (int r = 0; r < p; ++r) {
        double acc = -prog.eq_c[static_cast<size_t>(r)];
        for (int j = 0; j < n; ++j) acc += prog.eq_a(r, j) * x[static_cast<size_t>(j)];
        ws.r_pri[static_cast<size_t>(r)] = acc;
      }
      if (!kkt_solve(prog, ws)) {
        failed = true;
        failure = "Newton system not positive definite";
        break;
      }
      ++rep.newton_steps;

      double dual_inf = 0.0;
      for (int j = 0; j < n; ++j) {
        double r = ws.grad_phi[static_cast<size_t>(j)];
        for (int rr = 0; rr < p; ++rr) r += prog.eq_a(rr, j) * ws.w[static_cast<size_t>(rr)];
        dual_inf = std::max(dual_inf, std::abs(r));
      }
      double w_sum = 0.0;
      for (double v : ws.w) w_sum += std::abs(v);
      const double scale =
          std::max(100.0, (lambda_sum + w_sum) / std::max(1.0, static_cast<double>(m + p))) / 100.0;
      // Loose centering at large mu, full accuracy at the final stage.
      const double stage_target = std::max(0.25 * opts.tol, 1e-2 * mu) * scale;
      const double pri_inf = norm_inf(ws.r_pri);
      if (dual_inf <= stage_target && pri_inf <= 1e-10) break;
      if (dual_inf >= 0.9 * last_dual) {
        if (++stall >= 6) break;  // double-precision floor for this stage
      } else {
        stall = 0;
      }
      last_dual = std::min(last_dual, dual_inf);

      const double slope = dot(ws.grad_phi, ws.dx);
      double step = 1.0;
      bool moved = false;
      while (step > 1e-14) {
        for (int j = 0; j < n; ++j)
          x_trial[static_cast<size_t>(j)] = x[static_cast<size_t>(j)] + step * ws.dx[static_cast<size_t>(j)];
        bool ok = true;
        const double phi_trial = barrier_value(prog, x_trial, mu, &ok);
        if (ok && phi_trial <= phi + opts.armijo * step * slope) {
          x = x_trial;
          moved = true;
          break;
        }
        step *= opts.backtrack;
      }
      if (std::getenv("EDGEPART_SOLVER_DEBUG")) {
        std::fprintf(stderr, "mu=%.1e it=%d phi=%.10e dual=%.3e pri=%.1e step=%s scale=%.1e\n", mu,
                     it, phi, dual_inf, pri_inf, moved ? std::to_string(step).c_str() : "stall",
                     scale);
      }
      if (!moved) break;  // double-precision floor of this stage; polish recovers
    }
    ++rep.barrier_stages;
    rep.stage_objectives.push_back(prog.objective->value(x));
    if (failed) break;
    if (rep.stage_objectives.back() < opts.objective_stop) {
      rep.stopped_early = true;
      break;
    }
    if (m == 0 ||
        static_cast<double>(m) * mu <= 0.5 * opts.tol * (1.0 + std::abs(rep.stage_objectives.back())))
      break;
    if (mu / opts.mu_shrink < opts.mu_min) break;  // floor reached; polish finishes
    mu /= opts.mu_shrink;
  }

  // Multipliers at the returned point, then an active-set Newton polish.
  for (int i = 0; i < m; ++i) {
    const double gi = prog.inequalities[static_cast<size_t>(i)]->value(x);
    lambda[static_cast<size_t>(i)] = (gi < 0.0) ? mu / (-gi) : 0.0;
  }
  Vec nu = ws.w;
  nu.resize(static_cast<size_t>(p), 0.0);
  Residuals res = kkt_residuals(prog, x, lambda, nu);
  if (!rep.stopped_early) polish(prog, mu, x, lambda, nu, res);

  rep.x = x;
  rep.objective = prog.objective->value(x);
  rep.ineq_multipliers = lambda;
  rep.eq_multipliers = nu;
  rep.kkt_residual = res.combined();
  rep.failure = failure;
  rep.converged = !failed && (rep.stopped_early || rep.kkt_residual <= opts.tol);
  return rep;
}

PhaseOneResult phase_one(const ConvexProgram& prog, const Vec& x0, const SolverOptions& opts) {
  const int n = prog.n_vars;
  const int m = static_cast<int>(prog.inequalities.size());
  std::vector<uint8_t> soft = prog.phase1_soft;
  if (soft.empty()) soft.assign(static_cast<size_t>(m), 1);
  EDGEPART_REQUIRE(soft.size() == static_cast<size_t>(m), ValidationError,
                   "phase1_soft size mismatch");

  double worst_soft = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double gi = prog.inequalities[static_cast<size_t>(i)]->value(x0);
    EDGEPART_REQUIRE(std::isfinite(gi), NumericError, "phase-I start outside function domain");
    if (soft[static_cast<size_t>(i)]) {
      worst_soft = std::max(worst_soft, gi);
    } else {
      EDGEPART_REQUIRE(gi < 0.0, ValidationError, "phase-I start violates a hard constraint");
    }
  }
  if (worst_soft < 0.0) return {true, x0, worst_soft};  // already strictly feasible

  ConvexProgram aug;
  aug.n_vars = n + 1;
  Vec obj_coeff(static_cast<size_t>(n) + 1, 0.0);
  obj_coeff.back() = 1.0;
  aug.objective = std::make_shared<LinearFn>(obj_coeff, 0.0);
  const double slack_floor = std::max(1.0, 2.0 * std::abs(worst_soft));
  for (int i = 0; i < m; ++i) {
    if (soft[static_cast<size_t>(i)]) {
      aug.inequalities.push_back(
          std::make_shared<SoftenedFn>(prog.inequalities[static_cast<size_t>(i)], n, n + 1));
    } else {
      aug.inequalities.push_back(
          std::make_shared<LiftedFn>(prog.inequalities[static_cast<size_t>(i)], n, n + 1));
    }
  }
  {  // s >= -slack_floor keeps the auxiliary objective bounded
    Vec c(static_cast<size_t>(n) + 1, 0.0);
    c.back() = -1.0;
    aug.inequalities.push_back(std::make_shared<LinearFn>(std::move(c), -slack_floor));
  }
  if (prog.eq_a.rows() > 0) {
    aug.eq_a.resize(prog.eq_a.rows(), n + 1);
    for (int r = 0; r < prog.eq_a.rows(); ++r)
      for (int j = 0; j < n; ++j) aug.eq_a(r, j) = prog.eq_a(r, j);
    aug.eq_c = prog.eq_c;
  }

  Vec xs(x0);
  xs.push_back(worst_soft + 0.1 * (1.0 + std::abs(worst_soft)));

  SolverOptions p1opts = opts;
  p1opts.objective_stop = -1e-9 - 1e-6 * std::abs(worst_soft);
  SolveReport rep = solve(aug, xs, p1opts);

  PhaseOneResult out;
  out.x.assign(rep.x.begin(), rep.x.begin() + n);
  out.min_slack = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    if (!soft[static_cast<size_t>(i)]) continue;
    out.min_slack = std::max(out.min_slack, prog.inequalities[static_cast<size_t>(i)]->value(out.x));
  }
  out.feasible = out.min_slack < 0.0;
  return out;
}

}  // namespace edgepart
