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

#include "edgepart/pccp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "edgepart/ccp.hpp"
#include "edgepart/error.hpp"

namespace edgepart {

namespace {

/// sum_m w_m x_m^2 - y_prev*(2y - y_prev) - alpha <= 0
class DispersionUpper : public SmoothFn {
 public:
  DispersionUpper(int n_total, int x0, int iy, int ia, Vec w, double y_prev)
      : n_(n_total), x0_(x0), iy_(iy), ia_(ia), w_(std::move(w)), y_prev_(y_prev) {}

  double eval(const Vec& x, Vec* grad) const override {
    if (grad) grad->assign(static_cast<size_t>(n_), 0.0);
    double v = y_prev_ * y_prev_ - 2.0 * y_prev_ * x[static_cast<size_t>(iy_)] -
               x[static_cast<size_t>(ia_)];
    for (size_t m = 0; m < w_.size(); ++m) {
      const double xm = x[static_cast<size_t>(x0_) + m];
      v += w_[m] * xm * xm;
      if (grad) (*grad)[static_cast<size_t>(x0_) + m] = 2.0 * w_[m] * xm;
    }
    if (grad) {
      (*grad)[static_cast<size_t>(iy_)] = -2.0 * y_prev_;
      (*grad)[static_cast<size_t>(ia_)] = -1.0;
    }
    return v;
  }

  void add_hessian(const Vec&, double scale, Mat& h) const override {
    for (size_t m = 0; m < w_.size(); ++m) {
      const int i = x0_ + static_cast<int>(m);
      h(i, i) += scale * 2.0 * w_[m];
    }
  }

 private:
  int n_, x0_, iy_, ia_;
  Vec w_;
  double y_prev_;
};

/// y^2 - sum_m w_m x_prev_m*(2x_m - x_prev_m) - beta <= 0
class DispersionLower : public SmoothFn {
 public:
  DispersionLower(int n_total, int x0, int iy, int ib, Vec w, Vec x_prev)
      : n_(n_total), x0_(x0), iy_(iy), ib_(ib), w_(std::move(w)), xp_(std::move(x_prev)) {}

  double eval(const Vec& x, Vec* grad) const override {
    if (grad) grad->assign(static_cast<size_t>(n_), 0.0);
    const double y = x[static_cast<size_t>(iy_)];
    double v = y * y - x[static_cast<size_t>(ib_)];
    for (size_t m = 0; m < w_.size(); ++m) {
      v -= w_[m] * xp_[m] * (2.0 * x[static_cast<size_t>(x0_) + m] - xp_[m]);
      if (grad) (*grad)[static_cast<size_t>(x0_) + m] = -2.0 * w_[m] * xp_[m];
    }
    if (grad) {
      (*grad)[static_cast<size_t>(iy_)] = 2.0 * y;
      (*grad)[static_cast<size_t>(ib_)] = -1.0;
    }
    return v;
  }

  void add_hessian(const Vec&, double scale, Mat& h) const override {
    h(iy_, iy_) += scale * 2.0;
  }

 private:
  int n_, x0_, iy_, ib_;
  Vec w_;
  Vec xp_;
};

/// Constant per-point data of one device at fixed (b, f).
struct DeviceTerms {
  Vec cost;       // kappa*(w/g)*f^2 + p*d/(b*eta)
  Vec mean_time;  // device + upload + vm stage means (incl. padding)
  Vec w_diag;     // covariance diagonal
  // The dispersion block is solved in rescaled coordinates: w entries of
  // order 1e-7 s^2 would leave the quadratic rows hopelessly unbalanced
  // against the unit-scale boxes. With w_hat = w/w_scale and y_hat =
  // y/sqrt(w_scale) everything quadratic is O(1); slacks scale by w_scale.
  Vec w_hat;
  double w_scale = 1.0;
  double sqrt_scale = 1.0;
  double sigma = 0.0;
  double deadline = 0.0;
  int k = 0;  // number of points (M+1)
};

DeviceTerms device_terms(const DeviceScenario& dev, double b, double f) {
  DeviceTerms t;
  t.k = dev.profile->max_point() + 1;
  t.cost.resize(static_cast<size_t>(t.k));
  t.mean_time.resize(static_cast<size_t>(t.k));
  t.w_diag.resize(static_cast<size_t>(t.k));
  for (int m = 0; m < t.k; ++m) {
    t.cost[static_cast<size_t>(m)] = expected_total_energy(dev, m, b, f);
    t.mean_time[static_cast<size_t>(m)] = expected_total_time(dev, m, b, f);
    t.w_diag[static_cast<size_t>(m)] = dev.profile->covariance_s2(m, m);
  }
  double w_max = 0.0;
  for (double w : t.w_diag) w_max = std::max(w_max, w);
  t.w_scale = w_max > 0.0 ? w_max : 1.0;
  t.sqrt_scale = std::sqrt(t.w_scale);
  t.w_hat.resize(t.w_diag.size());
  for (size_t m = 0; m < t.w_diag.size(); ++m) t.w_hat[m] = t.w_diag[m] / t.w_scale;
  t.sigma = sigma_of(dev.epsilon);
  t.deadline = dev.deadline_s;
  return t;
}

/// Variable block layout of one device: x(K), y, alpha, beta, gamma(K).
struct BlockIdx {
  int x0, iy, ia, ib, g0, size;
};

BlockIdx block_at(int offset, int k) {
  BlockIdx b;
  b.x0 = offset;
  b.iy = offset + k;
  b.ia = offset + k + 1;
  b.ib = offset + k + 2;
  b.g0 = offset + k + 3;
  b.size = 2 * k + 3;
  return b;
}

/// Appends one device's constraints (box first) and objective coefficients.
/// The y/alpha/beta coordinates live in the rescaled units of DeviceTerms.
void append_device(const DeviceTerms& t, const BlockIdx& idx, int n_total, double rho,
                   const Vec& x_prev, double y_prev, double y_floor, ConvexProgram& prog,
                   Vec& obj_coeff) {
  const int k = t.k;
  const double y_prev_hat = y_prev / t.sqrt_scale;
  for (int m = 0; m < k; ++m) obj_coeff[static_cast<size_t>(idx.x0 + m)] = t.cost[static_cast<size_t>(m)];
  obj_coeff[static_cast<size_t>(idx.ia)] = rho * t.w_scale;
  obj_coeff[static_cast<size_t>(idx.ib)] = rho * t.w_scale;
  for (int m = 0; m < k; ++m) obj_coeff[static_cast<size_t>(idx.g0 + m)] = rho;

  auto single = [&](int i, double sign, double c) {
    Vec v(static_cast<size_t>(n_total), 0.0);
    v[static_cast<size_t>(i)] = sign;
    prog.inequalities.push_back(std::make_shared<LinearFn>(std::move(v), c));
  };
  for (int m = 0; m < k; ++m) {
    single(idx.x0 + m, -1.0, 0.0);  // x >= 0
    single(idx.x0 + m, 1.0, -1.0);  // x <= 1
  }
  single(idx.iy, -1.0, y_floor / t.sqrt_scale);  // y >= y_floor
  single(idx.ia, -1.0, 0.0);
  single(idx.ib, -1.0, 0.0);
  for (int m = 0; m < k; ++m) single(idx.g0 + m, -1.0, 0.0);

  {  // deadline: sum_m t_m x_m + sigma y <= D
    Vec v(static_cast<size_t>(n_total), 0.0);
    for (int m = 0; m < k; ++m) v[static_cast<size_t>(idx.x0 + m)] = t.mean_time[static_cast<size_t>(m)];
    v[static_cast<size_t>(idx.iy)] = t.sigma * t.sqrt_scale;
    prog.inequalities.push_back(std::make_shared<LinearFn>(std::move(v), -t.deadline));
  }
  prog.inequalities.push_back(
      std::make_shared<DispersionUpper>(n_total, idx.x0, idx.iy, idx.ia, t.w_hat, y_prev_hat));
  prog.inequalities.push_back(
      std::make_shared<DispersionLower>(n_total, idx.x0, idx.iy, idx.ib, t.w_hat, x_prev));
  for (int m = 0; m < k; ++m) {
    // x_m (1 - 2 x_prev_m) + x_prev_m^2 <= gamma_m
    Vec v(static_cast<size_t>(n_total), 0.0);
    v[static_cast<size_t>(idx.x0 + m)] = 1.0 - 2.0 * x_prev[static_cast<size_t>(m)];
    v[static_cast<size_t>(idx.g0 + m)] = -1.0;
    prog.inequalities.push_back(std::make_shared<LinearFn>(
        std::move(v), x_prev[static_cast<size_t>(m)] * x_prev[static_cast<size_t>(m)]));
  }
}

/// Reduced block for a device whose dispersion is identically zero: the
/// auxiliary y (and its paired slacks) only exist to carry sqrt(sum w x^2),
/// so when every w_mm vanishes the exact model is the LP over (x, gamma) and
/// the numerical y-floor would just forbid exactly binary rows.
void append_device_nodisp(const DeviceTerms& t, int x0, int g0, int n_total, double rho,
                          const Vec& x_prev, ConvexProgram& prog, Vec& obj_coeff) {
  const int k = t.k;
  for (int m = 0; m < k; ++m) obj_coeff[static_cast<size_t>(x0 + m)] = t.cost[static_cast<size_t>(m)];
  for (int m = 0; m < k; ++m) obj_coeff[static_cast<size_t>(g0 + m)] = rho;
  auto single = [&](int i, double sign, double c) {
    Vec v(static_cast<size_t>(n_total), 0.0);
    v[static_cast<size_t>(i)] = sign;
    prog.inequalities.push_back(std::make_shared<LinearFn>(std::move(v), c));
  };
  for (int m = 0; m < k; ++m) {
    single(x0 + m, -1.0, 0.0);
    single(x0 + m, 1.0, -1.0);
  }
  for (int m = 0; m < k; ++m) single(g0 + m, -1.0, 0.0);
  {
    Vec v(static_cast<size_t>(n_total), 0.0);
    for (int m = 0; m < k; ++m) v[static_cast<size_t>(x0 + m)] = t.mean_time[static_cast<size_t>(m)];
    prog.inequalities.push_back(std::make_shared<LinearFn>(std::move(v), -t.deadline));
  }
  for (int m = 0; m < k; ++m) {
    Vec v(static_cast<size_t>(n_total), 0.0);
    v[static_cast<size_t>(x0 + m)] = 1.0 - 2.0 * x_prev[static_cast<size_t>(m)];
    v[static_cast<size_t>(g0 + m)] = -1.0;
    prog.inequalities.push_back(std::make_shared<LinearFn>(
        std::move(v), x_prev[static_cast<size_t>(m)] * x_prev[static_cast<size_t>(m)]));
  }
}

/// Strictly feasible start for one device block. The previous iterate is only
/// the linearization point; the start is pushed into the interior and the
/// slack coordinates lifted above their constraint values.
/// Interior decision row near x_prev with a strictly positive deadline gap;
/// falls back to the fastest point, then to an infeasibility error.
Vec interior_row(const DeviceTerms& t, const Vec& x_prev, double needed_gap, int device_id,
                 double* gap_out) {
  const int k = t.k;
  Vec xs(static_cast<size_t>(k));
  auto mix = [&](const Vec& base, double theta) {
    for (int m = 0; m < k; ++m)
      xs[static_cast<size_t>(m)] =
          (1.0 - theta) * base[static_cast<size_t>(m)] + theta / static_cast<double>(k);
  };
  auto gap_at = [&](const Vec& row) {
    double s = 0.0;
    for (int m = 0; m < k; ++m) s += t.mean_time[static_cast<size_t>(m)] * row[static_cast<size_t>(m)];
    return t.deadline - s;
  };
  int fastest = 0;
  for (int m = 1; m < k; ++m)
    if (t.mean_time[static_cast<size_t>(m)] < t.mean_time[static_cast<size_t>(fastest)]) fastest = m;
  Vec onehot(static_cast<size_t>(k), 0.0);
  onehot[static_cast<size_t>(fastest)] = 1.0;
  // Mix toward uniform as far as the deadline allows; fall back to the
  // fastest point, then to an almost pure mixture, before giving up.
  const struct {
    const Vec* base;
    double theta;
  } attempts[] = {{&x_prev, 1e-2}, {&onehot, 1e-2}, {&onehot, 1e-6}};
  for (const auto& attempt : attempts) {
    mix(*attempt.base, attempt.theta);
    const double gap = gap_at(xs);
    if (gap > needed_gap) {
      *gap_out = gap;
      return xs;
    }
  }
  throw InfeasibleError("device " + std::to_string(device_id) +
                            " cannot meet its deadline at the current allocation",
                        {device_id});
}

Vec block_start_nodisp(const DeviceTerms& t, const Vec& x_prev, int device_id) {
  const int k = t.k;
  double gap = 0.0;
  const Vec xs = interior_row(t, x_prev, 1e-12 * t.deadline, device_id, &gap);
  Vec z(static_cast<size_t>(2 * k), 0.0);
  for (int m = 0; m < k; ++m) z[static_cast<size_t>(m)] = xs[static_cast<size_t>(m)];
  for (int m = 0; m < k; ++m) {
    const double g36e = xs[static_cast<size_t>(m)] * (1.0 - 2.0 * x_prev[static_cast<size_t>(m)]) +
                        x_prev[static_cast<size_t>(m)] * x_prev[static_cast<size_t>(m)];
    z[static_cast<size_t>(k + m)] = std::max(0.0, g36e) + 1e-3;
  }
  return z;
}

Vec block_start(const DeviceTerms& t, const Vec& x_prev, double y_prev, double y_floor,
                int device_id) {
  const int k = t.k;
  double gap = 0.0;
  const Vec xs = interior_row(t, x_prev, 2.5 * y_floor * t.sigma, device_id, &gap);
  // Scaled coordinates throughout, matching append_device.
  const double yf_hat = y_floor / t.sqrt_scale;
  const double yp_hat = y_prev / t.sqrt_scale;
  const double y_cap = gap / (t.sigma * t.sqrt_scale);
  double ys = std::max(yp_hat, 2.0 * yf_hat);
  ys = std::min(ys, 0.5 * y_cap + yf_hat);
  if (ys <= yf_hat) ys = std::min(2.0 * yf_hat, 0.5 * y_cap);

  Vec z(static_cast<size_t>(2 * k + 3), 0.0);
  for (int m = 0; m < k; ++m) z[static_cast<size_t>(m)] = xs[static_cast<size_t>(m)];
  z[static_cast<size_t>(k)] = ys;
  // Slack lift: strictly above each penalized constraint value.
  double quad = 0.0, lin = 0.0;
  for (int m = 0; m < k; ++m) {
    quad += t.w_hat[static_cast<size_t>(m)] * xs[static_cast<size_t>(m)] * xs[static_cast<size_t>(m)];
    lin += t.w_hat[static_cast<size_t>(m)] * x_prev[static_cast<size_t>(m)] *
           (2.0 * xs[static_cast<size_t>(m)] - x_prev[static_cast<size_t>(m)]);
  }
  const double lift = 1e-3 * (1.0 + quad + ys * ys);
  z[static_cast<size_t>(k + 1)] = std::max(0.0, quad - yp_hat * (2.0 * ys - yp_hat)) + lift;
  z[static_cast<size_t>(k + 2)] = std::max(0.0, ys * ys - lin) + lift;
  for (int m = 0; m < k; ++m) {
    const double g36e = xs[static_cast<size_t>(m)] * (1.0 - 2.0 * x_prev[static_cast<size_t>(m)]) +
                        x_prev[static_cast<size_t>(m)] * x_prev[static_cast<size_t>(m)];
    z[static_cast<size_t>(k + 3 + m)] = std::max(0.0, g36e) + 1e-3;
  }
  return z;
}

}  // namespace

void PccpConfig::validate() const {
  EDGEPART_REQUIRE(rho0 > 0.0, ValidationError, "rho0 must be > 0");
  EDGEPART_REQUIRE(nu > 1.0, ValidationError, "nu must be > 1");
  EDGEPART_REQUIRE(rho_max >= rho0, ValidationError, "rho_max must be >= rho0");
  EDGEPART_REQUIRE(theta_err > 0.0, ValidationError, "theta_err must be > 0");
  EDGEPART_REQUIRE(max_iters >= 1, ValidationError, "max_iters must be >= 1");
  EDGEPART_REQUIRE(y_floor > 0.0, ValidationError, "y_floor must be > 0");
}

ConvexProgram build_inner_problem(const std::vector<DeviceScenario>& devices,
                                  const PccpState& state, const Allocation& alloc) {
  EDGEPART_REQUIRE(state.x.size() == devices.size() && state.y.size() == devices.size(),
                   ValidationError, "state size mismatch");
  ConvexProgram prog;
  int n_total = 0;
  std::vector<BlockIdx> idx;
  for (size_t n = 0; n < devices.size(); ++n) {
    const int k = devices[n].profile->max_point() + 1;
    EDGEPART_REQUIRE(state.x[n].size() == static_cast<size_t>(k), ValidationError,
                     "state row length mismatch");
    idx.push_back(block_at(n_total, k));
    n_total += idx.back().size;
  }
  prog.n_vars = n_total;
  Vec obj_coeff(static_cast<size_t>(n_total), 0.0);
  for (size_t n = 0; n < devices.size(); ++n) {
    const DeviceTerms t = device_terms(devices[n], alloc.bandwidth_hz[n], alloc.frequency_hz[n]);
    append_device(t, idx[n], n_total, state.rho, state.x[n], state.y[n], 1e-6, prog, obj_coeff);
  }
  prog.objective = std::make_shared<LinearFn>(std::move(obj_coeff), 0.0);
  prog.eq_a.resize(static_cast<int>(devices.size()), n_total);
  prog.eq_c.assign(devices.size(), 1.0);
  for (size_t n = 0; n < devices.size(); ++n) {
    const int k = devices[n].profile->max_point() + 1;
    for (int m = 0; m < k; ++m) prog.eq_a(static_cast<int>(n), idx[n].x0 + m) = 1.0;
  }
  return prog;
}

PartitionDecision round_and_repair(const std::vector<Vec>& x_relaxed,
                                   const std::vector<DeviceScenario>& devices,
                                   const Allocation& alloc, double round_threshold) {
  EDGEPART_REQUIRE(x_relaxed.size() == devices.size(), ValidationError,
                   "relaxed decision size mismatch");
  PartitionDecision out;
  out.x.resize(devices.size());
  for (size_t n = 0; n < devices.size(); ++n) {
    const DeviceScenario& dev = devices[n];
    const Vec& row = x_relaxed[n];
    const int k = dev.profile->max_point() + 1;
    EDGEPART_REQUIRE(row.size() == static_cast<size_t>(k), ValidationError,
                     "relaxed row length mismatch");
    int m0 = 0;
    for (int m = 1; m < k; ++m)
      if (row[static_cast<size_t>(m)] > row[static_cast<size_t>(m0)]) m0 = m;

    const double b = alloc.bandwidth_hz[n];
    const double f = alloc.frequency_hz[n];
    int chosen = -1;
    if (row[static_cast<size_t>(m0)] >= round_threshold &&
        deadline_slack(dev, m0, b, f) >= -1e-6) {
      chosen = m0;
    } else {
      // Feasible point of smallest deterministic total time (same slack
      // tolerance as the direct acceptance: allocations routinely leave the
      // incumbent point exactly binding).
      double best_total = 0.0;
      for (int m = 0; m < k; ++m) {
        const DeadlineTerms terms = deadline_terms(dev, m, b, f);
        const double total = terms.mean_part + terms.dispersion_part;
        if (total <= terms.bound + 1e-6 && (chosen < 0 || total < best_total)) {
          chosen = m;
          best_total = total;
        }
      }
      if (chosen < 0) {
        throw InfeasibleError(
            "rounding infeasible: no partition point meets the deadline of device " +
                std::to_string(dev.id),
            {dev.id});
      }
    }
    out.x[n].assign(static_cast<size_t>(k), 0.0);
    out.x[n][static_cast<size_t>(chosen)] = 1.0;
  }
  return out;
}

PccpResult pccp_solve(const std::vector<DeviceScenario>& devices, const Allocation& alloc,
                      const PccpConfig& cfg) {
  cfg.validate();
  EDGEPART_REQUIRE(!devices.empty(), ValidationError, "no devices");
  EDGEPART_REQUIRE(alloc.bandwidth_hz.size() == devices.size() &&
                       alloc.frequency_hz.size() == devices.size(),
                   ValidationError, "allocation size mismatch");

  const size_t n_dev = devices.size();
  std::vector<DeviceTerms> terms;
  terms.reserve(n_dev);
  for (size_t n = 0; n < n_dev; ++n)
    terms.push_back(device_terms(devices[n], alloc.bandwidth_hz[n], alloc.frequency_hz[n]));

  // Uninformative start: uniform rows, y matched to the implied dispersion.
  std::vector<Vec> x(n_dev);
  Vec y(n_dev);
  for (size_t n = 0; n < n_dev; ++n) {
    const int k = terms[n].k;
    x[n].assign(static_cast<size_t>(k), 1.0 / static_cast<double>(k));
    double quad = 0.0;
    for (int m = 0; m < k; ++m)
      quad += terms[n].w_diag[static_cast<size_t>(m)] * x[n][static_cast<size_t>(m)] *
              x[n][static_cast<size_t>(m)];
    y[static_cast<size_t>(n)] = std::max(std::sqrt(quad), cfg.y_floor);
  }

  SolverOptions opts;
  opts.tol = cfg.kernel_tol;
  // Penalty weights up to rho_max drive the active multipliers to ~1e4; the
  // barrier must hand over to the polish before lambda^2/mu leaves double
  // range.
  opts.mu_min = 1e-6;

  PccpResult result;
  double rho = cfg.rho0;
  double prev_slack_sum = std::numeric_limits<double>::infinity();
  int iter = 0;
  while (iter < cfg.max_iters) {
    ++iter;
    double dx_sq = 0.0;
    double energy = 0.0;
    double slack_sum = 0.0;
    double max_slack = 0.0;
    for (size_t n = 0; n < n_dev; ++n) {
      const DeviceTerms& t = terms[n];
      const int k = t.k;
      double w_total = 0.0;
      for (double w : t.w_diag) w_total += w;
      const bool with_dispersion = w_total > 0.0;

      ConvexProgram prog;
      int gamma_at = 0;
      Vec z0;
      try {
        if (with_dispersion) {
          prog.n_vars = 2 * k + 3;
          Vec obj_coeff(static_cast<size_t>(prog.n_vars), 0.0);
          const BlockIdx idx = block_at(0, k);
          append_device(t, idx, prog.n_vars, rho, x[n], y[static_cast<size_t>(n)], cfg.y_floor,
                        prog, obj_coeff);
          prog.objective = std::make_shared<LinearFn>(std::move(obj_coeff), 0.0);
          gamma_at = idx.g0;
          z0 = block_start(t, x[n], y[static_cast<size_t>(n)], cfg.y_floor, devices[n].id);
        } else {
          prog.n_vars = 2 * k;
          Vec obj_coeff(static_cast<size_t>(prog.n_vars), 0.0);
          append_device_nodisp(t, 0, k, prog.n_vars, rho, x[n], prog, obj_coeff);
          prog.objective = std::make_shared<LinearFn>(std::move(obj_coeff), 0.0);
          gamma_at = k;
          z0 = block_start_nodisp(t, x[n], devices[n].id);
        }
      } catch (const InfeasibleError&) {
        // No strict interior left: the deadline face collapses onto (at most)
        // a single vertex. Pin the device to its best one-hot if that vertex
        // exists, otherwise the deadline really is unreachable here.
        int best = -1;
        double best_slack = 0.0;
        for (int m = 0; m < k; ++m) {
          const double disp = with_dispersion ? t.sigma * std::sqrt(t.w_diag[static_cast<size_t>(m)]) : 0.0;
          const double slack = t.deadline - t.mean_time[static_cast<size_t>(m)] - disp;
          if (slack >= -1e-9 && (best < 0 || slack > best_slack)) {
            best = m;
            best_slack = slack;
          }
        }
        if (best < 0) throw;
        for (int m = 0; m < k; ++m) {
          const double xm = (m == best) ? 1.0 : 0.0;
          const double prev = x[n][static_cast<size_t>(m)];
          dx_sq += (xm - prev) * (xm - prev);
          x[n][static_cast<size_t>(m)] = xm;
          energy += t.cost[static_cast<size_t>(m)] * xm;
        }
        y[static_cast<size_t>(n)] =
            with_dispersion ? std::max(cfg.y_floor, std::sqrt(t.w_diag[static_cast<size_t>(best)]))
                            : 0.0;
        continue;
      }
      prog.eq_a.resize(1, prog.n_vars);
      prog.eq_c.assign(1, 1.0);
      for (int m = 0; m < k; ++m) prog.eq_a(0, m) = 1.0;

      SolveReport rep = solve(prog, z0, opts);
      if (!rep.converged && rep.kkt_residual > 1e4 * cfg.kernel_tol) {
        throw NumericError("partitioning inner solve failed for device " +
                           std::to_string(devices[n].id) + ": " +
                           (rep.failure.empty() ? "kkt " + std::to_string(rep.kkt_residual)
                                                : rep.failure));
      }
      for (int m = 0; m < k; ++m) {
        const double xm = std::min(1.0, std::max(0.0, rep.x[static_cast<size_t>(m)]));
        const double prev = x[n][static_cast<size_t>(m)];
        dx_sq += (xm - prev) * (xm - prev);
        x[n][static_cast<size_t>(m)] = xm;
        energy += t.cost[static_cast<size_t>(m)] * xm;
      }
      if (with_dispersion) {
        const BlockIdx idx = block_at(0, k);
        y[static_cast<size_t>(n)] = rep.x[static_cast<size_t>(idx.iy)] * t.sqrt_scale;
        const double a = std::max(0.0, rep.x[static_cast<size_t>(idx.ia)]) * t.w_scale;
        const double bb = std::max(0.0, rep.x[static_cast<size_t>(idx.ib)]) * t.w_scale;
        slack_sum += a + bb;
        max_slack = std::max({max_slack, a, bb});
      } else {
        y[static_cast<size_t>(n)] = 0.0;
      }
      for (int m = 0; m < k; ++m) {
        const double g = std::max(0.0, rep.x[static_cast<size_t>(gamma_at + m)]);
        slack_sum += g;
        max_slack = std::max(max_slack, g);
      }
    }
    PccpTraceRow row;
    row.iter = iter;
    row.rho = rho;
    row.objective = energy;
    row.penalty = rho * slack_sum;
    row.max_slack = max_slack;
    row.dx_norm = std::sqrt(dx_sq);
    result.trace.push_back(row);
    result.slack_sum = slack_sum;

    const bool saturated = rho >= cfg.rho_max;
    // Ties between points are stationary for the linearized binarity rows
    // (their gradient vanishes at one half), so growing rho forever buys
    // nothing and only hardens the inner problems; stop once the penalty
    // stops making progress.
    const bool stalled = slack_sum > 0.9 * prev_slack_sum;
    prev_slack_sum = slack_sum;
    rho = std::min(cfg.nu * rho, cfg.rho_max);
    // The iterate must stop moving AND the penalty must have squeezed the
    // violations out (or have nowhere left to go).
    if (row.dx_norm < cfg.theta_err && (slack_sum <= 1e-6 || saturated || stalled)) break;
  }
  result.iterations = iter;
  result.relaxed = x;
  result.decision = round_and_repair(x, devices, alloc, cfg.round_threshold);
  return result;
}

void write_pccp_trace_csv(const std::vector<PccpTraceRow>& rows, const std::string& path) {
  std::ofstream out(path);
  EDGEPART_REQUIRE(out.good(), ConfigError, "cannot write trace file: " + path);
  out << "iter,objective,penalty,max_slack,dx_norm\n";
  char buf[160];
  for (const PccpTraceRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g\n", r.iter, r.objective, r.penalty,
                  r.max_slack, r.dx_norm);
    out << buf;
  }
}

}  // namespace edgepart
