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

#include "edgepart/resource.hpp"

#include <cmath>
#include <sstream>

#include "edgepart/ccp.hpp"
#include "edgepart/error.hpp"

namespace edgepart {

namespace {

// Bandwidth floor: negligible against the 10-30 MHz budgets but keeps the
// offload terms away from their b -> 0 singularity.
constexpr double kBandwidthFloorHz = 1.0e3;

/// Per-device constants of one allocation instance, in the scaled variables
/// u = b/B (index n) and v = f/f_max (index N+n).
struct DevTerms {
  double d_bits = 0.0;       // payload of the chosen point
  double local_coeff = 0.0;  // kappa*(w/g)*f_max^2 -> energy = coeff * v^2
  double local_time = 0.0;   // (w/g)/f_max        -> time   = local_time / v
  double fixed_time = 0.0;   // vm mean + pad + sigma*sqrt(v_loc+v_vm)
  double deadline = 0.0;
  double tx_power = 0.0;
};

struct ScaledInstance {
  int n_dev = 0;
  double bandwidth = 0.0;
  std::vector<DevTerms> dev;
  std::vector<const DeviceScenario*> scen;
};

class RaObjective : public SmoothFn {
 public:
  explicit RaObjective(std::shared_ptr<const ScaledInstance> s) : owner_(std::move(s)), s_(owner_.get()) {}

  double eval(const Vec& x, Vec* grad) const override {
    const int n = s_->n_dev;
    if (grad) grad->assign(static_cast<size_t>(2 * n), 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const DevTerms& t = s_->dev[static_cast<size_t>(i)];
      const double u = x[static_cast<size_t>(i)];
      const double v = x[static_cast<size_t>(n + i)];
      total += t.local_coeff * v * v;
      const OffloadTimeDerivs off =
          offload_time_derivs(*s_->scen[static_cast<size_t>(i)], t.d_bits, s_->bandwidth * u);
      total += t.tx_power * off.t;
      if (grad) {
        (*grad)[static_cast<size_t>(i)] = t.tx_power * s_->bandwidth * off.dt_db;
        (*grad)[static_cast<size_t>(n + i)] = 2.0 * t.local_coeff * v;
      }
    }
    return total;
  }

  void add_hessian(const Vec& x, double scale, Mat& h) const override {
    const int n = s_->n_dev;
    for (int i = 0; i < n; ++i) {
      const DevTerms& t = s_->dev[static_cast<size_t>(i)];
      const double u = x[static_cast<size_t>(i)];
      const OffloadTimeDerivs off =
          offload_time_derivs(*s_->scen[static_cast<size_t>(i)], t.d_bits, s_->bandwidth * u);
      h(i, i) += scale * t.tx_power * s_->bandwidth * s_->bandwidth * off.d2t_db2;
      h(n + i, n + i) += scale * 2.0 * t.local_coeff;
    }
  }

 private:
  std::shared_ptr<const ScaledInstance> owner_;
  const ScaledInstance* s_;
};

class RaDeadline : public SmoothFn {
 public:
  RaDeadline(std::shared_ptr<const ScaledInstance> s, int i)
      : owner_(std::move(s)), s_(owner_.get()), i_(i) {}

  double eval(const Vec& x, Vec* grad) const override {
    const int n = s_->n_dev;
    const DevTerms& t = s_->dev[static_cast<size_t>(i_)];
    const double u = x[static_cast<size_t>(i_)];
    const double v = x[static_cast<size_t>(n + i_)];
    const OffloadTimeDerivs off =
        offload_time_derivs(*s_->scen[static_cast<size_t>(i_)], t.d_bits, s_->bandwidth * u);
    if (grad) {
      grad->assign(static_cast<size_t>(2 * n), 0.0);
      (*grad)[static_cast<size_t>(i_)] = s_->bandwidth * off.dt_db;
      (*grad)[static_cast<size_t>(n + i_)] = -t.local_time / (v * v);
    }
    return t.local_time / v + off.t + t.fixed_time - t.deadline;
  }

  void add_hessian(const Vec& x, double scale, Mat& h) const override {
    const int n = s_->n_dev;
    const DevTerms& t = s_->dev[static_cast<size_t>(i_)];
    const double u = x[static_cast<size_t>(i_)];
    const double v = x[static_cast<size_t>(n + i_)];
    const OffloadTimeDerivs off =
        offload_time_derivs(*s_->scen[static_cast<size_t>(i_)], t.d_bits, s_->bandwidth * u);
    h(i_, i_) += scale * s_->bandwidth * s_->bandwidth * off.d2t_db2;
    h(n + i_, n + i_) += scale * 2.0 * t.local_time / (v * v * v);
  }

 private:
  std::shared_ptr<const ScaledInstance> owner_;
  const ScaledInstance* s_;
  int i_;
};

ScaledInstance build_scaled(const RaInstance& inst) {
  ScaledInstance s;
  s.n_dev = static_cast<int>(inst.devices.size());
  s.bandwidth = inst.total_bandwidth_hz;
  for (size_t n = 0; n < inst.devices.size(); ++n) {
    const DeviceScenario& dev = inst.devices[n];
    const BlockStats& p = dev.profile->at(inst.points[n]);
    DevTerms t;
    t.d_bits = p.out_data_bits;
    const double work_ratio = p.cum_workload_flops / p.throughput_flops_per_cycle;
    t.local_coeff = dev.kappa_w_per_cps3 * work_ratio * dev.f_max_hz * dev.f_max_hz;
    t.local_time = work_ratio / dev.f_max_hz;
    t.fixed_time = p.vm_mean_s + p.time_pad_s +
                   sigma_of(dev.epsilon) * std::sqrt(p.local_var_s2 + p.vm_var_s2);
    t.deadline = dev.deadline_s;
    t.tx_power = dev.tx_power_w;
    s.dev.push_back(t);
    s.scen.push_back(&inst.devices[n]);
  }
  return s;
}

/// Index layout of the inequality list built below.
struct IneqLayout {
  int first_deadline = 0;
};

ConvexProgram build_program(const std::shared_ptr<const ScaledInstance>& s,
                            const std::vector<DeviceScenario>& devices, IneqLayout* layout) {
  const int n = s->n_dev;
  ConvexProgram prog;
  prog.n_vars = 2 * n;
  prog.objective = std::make_shared<RaObjective>(s);
  std::vector<uint8_t> soft;
  auto push_hard = [&](std::shared_ptr<const SmoothFn> fn) {
    prog.inequalities.push_back(std::move(fn));
    soft.push_back(0);
  };
  const double u_floor = kBandwidthFloorHz / s->bandwidth;
  for (int i = 0; i < n; ++i) {  // u_floor <= u_i <= 1
    Vec lo(static_cast<size_t>(2 * n), 0.0), hi(static_cast<size_t>(2 * n), 0.0);
    lo[static_cast<size_t>(i)] = -1.0;
    hi[static_cast<size_t>(i)] = 1.0;
    push_hard(std::make_shared<LinearFn>(lo, u_floor));
    push_hard(std::make_shared<LinearFn>(hi, -1.0));
  }
  for (int i = 0; i < n; ++i) {  // v_lo <= v_i <= 1
    const double v_lo =
        std::min(devices[static_cast<size_t>(i)].f_min_hz / devices[static_cast<size_t>(i)].f_max_hz,
                 1.0 - 1e-9);
    Vec lo(static_cast<size_t>(2 * n), 0.0), hi(static_cast<size_t>(2 * n), 0.0);
    lo[static_cast<size_t>(n + i)] = -1.0;
    hi[static_cast<size_t>(n + i)] = 1.0;
    push_hard(std::make_shared<LinearFn>(lo, v_lo));
    push_hard(std::make_shared<LinearFn>(hi, -1.0));
  }
  {  // sum u <= 1
    Vec c(static_cast<size_t>(2 * n), 0.0);
    for (int i = 0; i < n; ++i) c[static_cast<size_t>(i)] = 1.0;
    push_hard(std::make_shared<LinearFn>(c, -1.0));
  }
  layout->first_deadline = static_cast<int>(prog.inequalities.size());
  for (int i = 0; i < n; ++i) {
    prog.inequalities.push_back(std::make_shared<RaDeadline>(s, i));
    soft.push_back(1);
  }
  prog.phase1_soft = std::move(soft);
  return prog;
}

}  // namespace

void RaInstance::validate() const {
  EDGEPART_REQUIRE(!devices.empty(), ValidationError, "instance has no devices");
  EDGEPART_REQUIRE(points.size() == devices.size(), ValidationError,
                   "instance points size mismatch");
  EDGEPART_REQUIRE(total_bandwidth_hz > 0.0, ValidationError, "total bandwidth must be > 0");
  EDGEPART_REQUIRE(total_bandwidth_hz > kBandwidthFloorHz * static_cast<double>(devices.size()),
                   ValidationError, "total bandwidth too small for the device count");
  for (size_t n = 0; n < devices.size(); ++n) {
    devices[n].validate();
    devices[n].profile->at(points[n]);  // range check
  }
}

double probe_min_deadline(const DeviceScenario& dev, int m, double total_bandwidth_hz) {
  const BlockStats& p = dev.profile->at(m);
  const double local = p.cum_workload_flops / (p.throughput_flops_per_cycle * dev.f_max_hz);
  const double off = offload_time_for_bits(dev, p.out_data_bits, total_bandwidth_hz);
  return local + off + p.vm_mean_s + p.time_pad_s +
         sigma_of(dev.epsilon) * std::sqrt(p.local_var_s2 + p.vm_var_s2);
}

PointBounds point_bounds(const DeviceScenario& dev, int m, double total_bandwidth_hz) {
  PointBounds out;
  const BlockStats& p = dev.profile->at(m);
  const double fixed = p.vm_mean_s + p.time_pad_s +
                       sigma_of(dev.epsilon) * std::sqrt(p.local_var_s2 + p.vm_var_s2);
  const double work_ratio = p.cum_workload_flops / p.throughput_flops_per_cycle;
  const double local_at_fmax = work_ratio / dev.f_max_hz;
  const double off_at_full = offload_time_for_bits(dev, p.out_data_bits, total_bandwidth_hz);
  out.min_deadline_s = local_at_fmax + off_at_full + fixed;
  const double inf = std::numeric_limits<double>::infinity();
  if (out.min_deadline_s > dev.deadline_s) {
    out.b_min_hz = inf;
    out.energy_lb_j = inf;
    return out;
  }
  // Least bandwidth meeting the deadline at f_max (bisection on the upload
  // time, which decreases in b); the lower bracket end never overestimates.
  const double budget = dev.deadline_s - fixed - local_at_fmax;
  double lo = kBandwidthFloorHz, hi = total_bandwidth_hz;
  if (offload_time_for_bits(dev, p.out_data_bits, lo) <= budget) {
    hi = lo;
  } else {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (offload_time_for_bits(dev, p.out_data_bits, mid) <= budget)
        hi = mid;
      else
        lo = mid;
    }
  }
  out.b_min_hz = lo;
  // Energy floor: full bandwidth for the upload, slowest deadline-feasible f.
  const double t_budget_f = dev.deadline_s - fixed - off_at_full;
  double f_req = dev.f_min_hz;
  if (work_ratio > 0.0 && t_budget_f > 0.0)
    f_req = std::max(dev.f_min_hz, work_ratio / t_budget_f);
  f_req = std::min(f_req, dev.f_max_hz);
  out.energy_lb_j =
      dev.kappa_w_per_cps3 * work_ratio * f_req * f_req + dev.tx_power_w * off_at_full;
  return out;
}

Vec ra_feasibility_probe(const RaInstance& inst) {
  inst.validate();
  Vec out(inst.devices.size());
  for (size_t n = 0; n < inst.devices.size(); ++n)
    out[n] = probe_min_deadline(inst.devices[n], inst.points[n], inst.total_bandwidth_hz);
  return out;
}

RaSolution solve_ra(const RaInstance& inst, double tol, const std::optional<Allocation>& warm_start) {
  inst.validate();
  const int n = static_cast<int>(inst.devices.size());

  {  // Cheap certificate first: a device that cannot meet its deadline even
     // with the whole bandwidth and f_max blocks the instance outright.
    const Vec d_min = ra_feasibility_probe(inst);
    std::vector<int> blocking;
    for (int i = 0; i < n; ++i)
      if (d_min[static_cast<size_t>(i)] > inst.devices[static_cast<size_t>(i)].deadline_s)
        blocking.push_back(inst.devices[static_cast<size_t>(i)].id);
    if (!blocking.empty()) {
      std::ostringstream os;
      os << "deadline unreachable for device(s)";
      for (int id : blocking) os << ' ' << id;
      throw InfeasibleError(os.str(), blocking);
    }
  }

  auto scaled = std::make_shared<const ScaledInstance>(build_scaled(inst));
  IneqLayout layout;
  ConvexProgram prog = build_program(scaled, inst.devices, &layout);

  Vec x0(static_cast<size_t>(2 * n));
  bool warm_ok = false;
  if (warm_start && warm_start->bandwidth_hz.size() == static_cast<size_t>(n)) {
    // A warm start is only useful well inside the feasible set; points on a
    // boundary (the previous solve binds its deadlines) blow the barrier up.
    warm_ok = true;
    double u_sum = 0.0;
    for (int i = 0; i < n && warm_ok; ++i) {
      const DeviceScenario& dev = inst.devices[static_cast<size_t>(i)];
      const double u = warm_start->bandwidth_hz[static_cast<size_t>(i)] / inst.total_bandwidth_hz;
      const double v = warm_start->frequency_hz[static_cast<size_t>(i)] / dev.f_max_hz;
      u_sum += u;
      const double v_lo = dev.f_min_hz / dev.f_max_hz;
      if (u < 2.0 * kBandwidthFloorHz / inst.total_bandwidth_hz || u > 1.0 - 1e-6 ||
          v < v_lo * (1.0 + 1e-9) + 1e-9 || v > 1.0 - 1e-9) {
        warm_ok = false;
        break;
      }
      const double slack = deadline_slack(dev, inst.points[static_cast<size_t>(i)],
                                          warm_start->bandwidth_hz[static_cast<size_t>(i)],
                                          warm_start->frequency_hz[static_cast<size_t>(i)]);
      if (slack < 1e-6 * dev.deadline_s) warm_ok = false;
      x0[static_cast<size_t>(i)] = u;
      x0[static_cast<size_t>(n + i)] = v;
    }
    if (u_sum > 1.0 - 1e-6) warm_ok = false;
    warm_ok = warm_ok && strictly_feasible(prog, x0);
  }
  if (!warm_ok) {
    for (int i = 0; i < n; ++i) {
      x0[static_cast<size_t>(i)] = (1.0 - 1e-3) / static_cast<double>(n);
      x0[static_cast<size_t>(n + i)] = 1.0 - 1e-6;  // deadline slack is largest at f_max
    }
  }

  SolverOptions opts;
  opts.tol = tol;
  Vec x_start = x0;
  if (!strictly_feasible(prog, x0)) {
    PhaseOneResult p1 = phase_one(prog, x0, opts);
    if (!p1.feasible) {
      std::vector<int> blocking;
      for (int i = 0; i < n; ++i) {
        const double g =
            prog.inequalities[static_cast<size_t>(layout.first_deadline + i)]->value(p1.x);
        if (g >= -1e-12) blocking.push_back(inst.devices[static_cast<size_t>(i)].id);
      }
      std::ostringstream os;
      os << "no bandwidth/frequency split meets all deadlines; blocking device(s)";
      for (int id : blocking) os << ' ' << id;
      throw InfeasibleError(os.str(), blocking);
    }
    x_start = p1.x;
  }

  SolveReport rep = solve(prog, x_start, opts);
  if (!rep.converged && rep.kkt_residual > 1e4 * tol) {
    throw NumericError("resource allocation solve failed: " +
                       (rep.failure.empty() ? "kkt residual " + std::to_string(rep.kkt_residual)
                                            : rep.failure));
  }

  RaSolution out;
  out.report = rep;
  out.allocation.bandwidth_hz.resize(static_cast<size_t>(n));
  out.allocation.frequency_hz.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const DeviceScenario& dev = inst.devices[static_cast<size_t>(i)];
    out.allocation.bandwidth_hz[static_cast<size_t>(i)] =
        rep.x[static_cast<size_t>(i)] * inst.total_bandwidth_hz;
    double f = rep.x[static_cast<size_t>(n + i)] * dev.f_max_hz;
    // Zero local workload leaves f indeterminate; pin it for reproducibility.
    if (dev.profile->at(inst.points[static_cast<size_t>(i)]).cum_workload_flops == 0.0)
      f = dev.f_min_hz;
    f = std::min(std::max(f, dev.f_min_hz), dev.f_max_hz);
    out.allocation.frequency_hz[static_cast<size_t>(i)] = f;
  }
  out.allocation.validate(inst.devices, inst.total_bandwidth_hz);

  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const DeviceScenario& dev = inst.devices[static_cast<size_t>(i)];
    const double b = out.allocation.bandwidth_hz[static_cast<size_t>(i)];
    const double f = out.allocation.frequency_hz[static_cast<size_t>(i)];
    const double slack = deadline_slack(dev, inst.points[static_cast<size_t>(i)], b, f);
    EDGEPART_REQUIRE(slack >= -1e-6, NumericError,
                     "returned allocation violates a deadline beyond tolerance");
    energy += expected_total_energy(dev, inst.points[static_cast<size_t>(i)], b, f);
  }
  out.energy_j = energy;
  return out;
}

}  // namespace edgepart
