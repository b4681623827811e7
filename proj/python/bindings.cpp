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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgepart/ccp.hpp"
#include "edgepart/error.hpp"
#include "edgepart/fixtures.hpp"
#include "edgepart/mc.hpp"
#include "edgepart/pccp.hpp"
#include "edgepart/policies.hpp"
#include "edgepart/profile_io.hpp"
#include "edgepart/resource.hpp"
#include "edgepart/scenario.hpp"
#include "edgepart/stats.hpp"

namespace py = pybind11;
using namespace edgepart;

namespace {

Mat mat_from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (rows[static_cast<size_t>(i)].size() != rows.size())
      throw ValidationError("covariance rows must form a square matrix");
    for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return m;
}

std::vector<int> decision_points(const Solution& sol) {
  std::vector<int> pts;
  for (size_t n = 0; n < sol.decision.x.size(); ++n)
    pts.push_back(sol.decision.point_of(static_cast<int>(n)));
  return pts;
}

}  // namespace

PYBIND11_MODULE(_edgepart, m) {
  m.doc() = "Robust DNN partitioning and bandwidth/frequency allocation under "
            "uncertain inference time";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<ValidationError>(m, "ValidationError");

  py::class_<BlockStats>(m, "BlockStats")
      .def_readonly("point", &BlockStats::point)
      .def_readonly("out_data_bits", &BlockStats::out_data_bits)
      .def_readonly("cum_workload_flops", &BlockStats::cum_workload_flops)
      .def_readonly("throughput_flops_per_cycle", &BlockStats::throughput_flops_per_cycle)
      .def_readonly("local_var_s2", &BlockStats::local_var_s2)
      .def_readonly("vm_mean_s", &BlockStats::vm_mean_s)
      .def_readonly("vm_var_s2", &BlockStats::vm_var_s2);

  py::class_<DnnProfile, std::shared_ptr<DnnProfile>>(m, "DnnProfile")
      .def_readonly("name", &DnnProfile::name)
      .def_readonly("num_blocks", &DnnProfile::num_blocks)
      .def_property_readonly("max_point", &DnnProfile::max_point)
      .def_readonly("default_f_min_hz", &DnnProfile::default_f_min_hz)
      .def_readonly("default_f_max_hz", &DnnProfile::default_f_max_hz)
      .def_readonly("default_kappa_w_per_cps3", &DnnProfile::default_kappa_w_per_cps3)
      .def("block", [](const DnnProfile& p, int point) { return p.at(point); }, py::arg("point"))
      .def("covariance_diag",
           [](const DnnProfile& p) {
             Vec d;
             for (int i = 0; i <= p.max_point(); ++i) d.push_back(p.covariance_s2(i, i));
             return d;
           })
      .def("to_json", [](const DnnProfile& p) { return profile_to_json(p); });

  py::class_<DeviceScenario>(m, "DeviceScenario")
      .def_readwrite("id", &DeviceScenario::id)
      .def_readwrite("distance_m", &DeviceScenario::distance_m)
      .def_readwrite("channel_gain", &DeviceScenario::channel_gain)
      .def_readwrite("tx_power_w", &DeviceScenario::tx_power_w)
      .def_readwrite("noise_psd_w_per_hz", &DeviceScenario::noise_psd_w_per_hz)
      .def_readwrite("f_min_hz", &DeviceScenario::f_min_hz)
      .def_readwrite("f_max_hz", &DeviceScenario::f_max_hz)
      .def_readwrite("kappa_w_per_cps3", &DeviceScenario::kappa_w_per_cps3)
      .def_readwrite("deadline_s", &DeviceScenario::deadline_s)
      .def_readwrite("epsilon", &DeviceScenario::epsilon)
      .def_property_readonly(
          "profile_name", [](const DeviceScenario& d) { return d.profile ? d.profile->name : ""; });

  py::class_<Allocation>(m, "Allocation")
      .def_readonly("bandwidth_hz", &Allocation::bandwidth_hz)
      .def_readonly("frequency_hz", &Allocation::frequency_hz);

  py::class_<Solution>(m, "Solution")
      .def_property_readonly("policy", [](const Solution& s) { return policy_name(s.policy); })
      .def_property_readonly("points", &decision_points)
      .def_readonly("allocation", &Solution::allocation)
      .def_readonly("expected_energy_j", &Solution::expected_energy_j)
      .def_readonly("outer_iterations", &Solution::outer_iterations)
      .def_readonly("objective_trace", &Solution::objective_trace);

  py::class_<EvaluationReport>(m, "EvaluationReport")
      .def_readonly("policy", &EvaluationReport::policy)
      .def_readonly("n_samples", &EvaluationReport::n_samples)
      .def_readonly("violation_per_device", &EvaluationReport::violation_per_device)
      .def_readonly("violation_aggregate", &EvaluationReport::violation_aggregate)
      .def_readonly("mean_realized_energy_j", &EvaluationReport::mean_realized_energy_j)
      .def_readonly("expected_energy_j", &EvaluationReport::expected_energy_j)
      .def_readonly("warnings", &EvaluationReport::warnings);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("n_devices", &ScenarioConfig::n_devices)
      .def_readwrite("area_half_width_m", &ScenarioConfig::area_half_width_m)
      .def_readwrite("bandwidth_hz", &ScenarioConfig::bandwidth_hz)
      .def_readwrite("profile", &ScenarioConfig::profile)
      .def_readwrite("epsilon", &ScenarioConfig::epsilon)
      .def_readwrite("deadline_s", &ScenarioConfig::deadline_s)
      .def_readwrite("tx_power_w", &ScenarioConfig::tx_power_w)
      .def_readwrite("noise_psd_w_per_hz", &ScenarioConfig::noise_psd_w_per_hz)
      .def_readwrite("min_distance_m", &ScenarioConfig::min_distance_m)
      .def_readwrite("master_seed", &ScenarioConfig::master_seed);

  m.def("builtin_profile_names", &builtin_profile_names);
  m.def(
      "builtin_profile",
      [](const std::string& name) {
        return std::const_pointer_cast<DnnProfile>(builtin_profile(name));
      },
      py::arg("name"));
  m.def(
      "load_profile",
      [](const std::string& path) { return std::make_shared<DnnProfile>(load_profile(path)); },
      py::arg("path"));
  m.def("bundle_fixtures", &bundle_fixtures, py::arg("directory"),
        "Write the bundled profiles, checksums and the synthetic trace");

  m.def("sigma_of", &sigma_of, py::arg("epsilon"));
  m.def(
      "ecr_bound",
      [](const Vec& a, const Vec& mean, const std::vector<std::vector<double>>& cov, double eps) {
        return ecr_bound(a, mean, mat_from_rows(cov), eps);
      },
      py::arg("a"), py::arg("mean"), py::arg("cov"), py::arg("epsilon"),
      "Distribution-free bound a^T mean + sigma(eps) * sqrt(a^T cov a)");
  m.def("path_loss_db", &path_loss_db, py::arg("distance_m"));
  m.def("spectral_efficiency", &spectral_efficiency, py::arg("device"), py::arg("bandwidth_hz"));
  m.def("expected_total_time", &expected_total_time, py::arg("device"), py::arg("point"),
        py::arg("bandwidth_hz"), py::arg("frequency_hz"));
  m.def("expected_total_energy", &expected_total_energy, py::arg("device"), py::arg("point"),
        py::arg("bandwidth_hz"), py::arg("frequency_hz"));
  m.def("deadline_slack", &deadline_slack, py::arg("device"), py::arg("point"),
        py::arg("bandwidth_hz"), py::arg("frequency_hz"),
        "Slack of the deterministic deadline bound (negative = violated)");

  m.def("generate_scenario", &generate_scenario, py::arg("config"));
  m.def(
      "solve_ra",
      [](const std::vector<DeviceScenario>& devices, const std::vector<int>& points,
         double bandwidth_hz) {
        const RaSolution sol = solve_ra(RaInstance{devices, points, bandwidth_hz});
        return py::make_tuple(sol.allocation, sol.energy_j);
      },
      py::arg("devices"), py::arg("points"), py::arg("bandwidth_hz"),
      "Optimal (bandwidth, frequency) split for fixed partition points");
  m.def(
      "solve",
      [](const std::string& policy, const std::vector<DeviceScenario>& devices,
         double bandwidth_hz, uint64_t seed) {
        return solve_policy(policy_from_name(policy), devices, bandwidth_hz, seed, {});
      },
      py::arg("policy"), py::arg("devices"), py::arg("bandwidth_hz"), py::arg("seed") = 1,
      "Solve with one of: robust, worst_case, mean_value, random, exhaustive");
  m.def(
      "evaluate",
      [](const Solution& sol, const std::vector<DeviceScenario>& devices, const std::string& model,
         int n_samples, uint64_t seed) {
        SamplingModel sampling;
        sampling.kind = sampling_kind_from_name(model);
        return evaluate(sol, devices, sampling, n_samples, seed);
      },
      py::arg("solution"), py::arg("devices"), py::arg("model") = "gaussian_truncated",
      py::arg("n_samples") = 100000, py::arg("seed") = 1,
      "Monte Carlo deadline-violation and energy replay");
  m.def(
      "sweep_csv",
      [](const std::vector<DeviceScenario>& devices, double bandwidth_hz,
         const std::vector<std::string>& policies, const Vec& epsilon_grid,
         const Vec& deadline_grid_s, int n_samples, const std::string& model, uint64_t seed,
         int jobs) {
        SweepSpec spec;
        for (const std::string& p : policies) spec.policies.push_back(policy_from_name(p));
        spec.epsilon_grid = epsilon_grid;
        spec.deadline_grid_s = deadline_grid_s;
        spec.n_samples = n_samples;
        spec.model.kind = sampling_kind_from_name(model);
        spec.master_seed = seed;
        spec.jobs = jobs;
        return sweep_csv(devices, bandwidth_hz, spec);
      },
      py::arg("devices"), py::arg("bandwidth_hz"), py::arg("policies"),
      py::arg("epsilon_grid") = Vec{}, py::arg("deadline_grid_s") = Vec{},
      py::arg("n_samples") = 100000, py::arg("model") = "gaussian_truncated", py::arg("seed") = 1,
      py::arg("jobs") = 1);
  m.def(
      "fit_throughput",
      [](const std::string& trace_csv, int point, double workload_flops, double f_min_hz,
         double f_max_hz) {
        const TimingTrace trace = load_trace_csv(trace_csv, f_min_hz, f_max_hz);
        const ThroughputFit fit = fit_throughput(trace, point, workload_flops);
        return py::make_tuple(fit.g, fit.residual_sq);
      },
      py::arg("trace_csv"), py::arg("point"), py::arg("workload_flops"), py::arg("f_min_hz"),
      py::arg("f_max_hz"), "Returns (flops_per_cycle, residual_sq)");

#ifdef EDGEPART_VERSION
  m.attr("__version__") = EDGEPART_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
