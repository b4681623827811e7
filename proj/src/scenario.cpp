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

#include "edgepart/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "edgepart/error.hpp"
#include "edgepart/fixtures.hpp"
#include "edgepart/pccp.hpp"
#include "edgepart/profile_io.hpp"
#include "edgepart/resource.hpp"
#include "edgepart/stats.hpp"

namespace edgepart {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it)
    EDGEPART_REQUIRE(known.count(it.key()) > 0, ConfigError,
                     ctx + ": unknown field '" + it.key() + "'");
}

double num_at(const json& j, const std::string& key, const std::string& ctx) {
  EDGEPART_REQUIRE(j.at(key).is_number(), ConfigError, ctx + "." + key + " must be a number");
  return j.at(key).get<double>();
}

Vec vec_at(const json& j, const std::string& key, const std::string& ctx) {
  EDGEPART_REQUIRE(j.at(key).is_array(), ConfigError, ctx + "." + key + " must be an array");
  Vec out;
  for (const json& v : j.at(key)) {
    EDGEPART_REQUIRE(v.is_number(), ConfigError, ctx + "." + key + " entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  EDGEPART_REQUIRE(n_devices >= 1, ConfigError, "scenario.n_devices must be >= 1");
  EDGEPART_REQUIRE(bandwidth_hz > 0.0, ConfigError, "scenario.bandwidth_hz must be > 0");
  EDGEPART_REQUIRE(area_half_width_m > 0.0, ConfigError, "scenario.area_half_width_m must be > 0");
  EDGEPART_REQUIRE(!profile.empty() || profile_per_device, ConfigError,
                   "scenario.profile is required");
  EDGEPART_REQUIRE(epsilon > 0.0 && epsilon < 1.0, ConfigError,
                   "scenario.epsilon must lie in (0,1)");
  EDGEPART_REQUIRE(deadline_s > 0.0 || deadline_per_device_s, ConfigError,
                   "scenario.deadline_s must be > 0");
  EDGEPART_REQUIRE(min_distance_m > 0.0, ConfigError, "scenario.min_distance_m must be > 0");
  auto check_len = [&](size_t len, const char* what) {
    EDGEPART_REQUIRE(len == static_cast<size_t>(n_devices), ConfigError,
                     std::string("scenario.") + what + " must have n_devices entries");
  };
  if (profile_per_device) check_len(profile_per_device->size(), "profile_per_device");
  if (epsilon_per_device) check_len(epsilon_per_device->size(), "epsilon_per_device");
  if (deadline_per_device_s) check_len(deadline_per_device_s->size(), "deadline_per_device_s");
}

double path_loss_db(double distance_m) { return 38.0 + 30.0 * std::log10(distance_m); }

double channel_gain_from_distance(double distance_m) {
  return std::pow(10.0, -path_loss_db(distance_m) / 10.0);
}

std::vector<DeviceScenario> generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.master_seed);
  std::vector<DeviceScenario> devices;
  for (int n = 0; n < cfg.n_devices; ++n) {
    const double px = (2.0 * rng.uniform() - 1.0) * cfg.area_half_width_m;
    const double py = (2.0 * rng.uniform() - 1.0) * cfg.area_half_width_m;
    DeviceScenario dev;
    dev.id = n;
    dev.distance_m = std::max(cfg.min_distance_m, std::hypot(px, py));
    dev.channel_gain = channel_gain_from_distance(dev.distance_m);
    dev.tx_power_w = cfg.tx_power_w;
    dev.noise_psd_w_per_hz = cfg.noise_psd_w_per_hz;
    const std::string& prof_name =
        cfg.profile_per_device ? (*cfg.profile_per_device)[static_cast<size_t>(n)] : cfg.profile;
    dev.profile = resolve_profile(prof_name);
    dev.f_min_hz = dev.profile->default_f_min_hz;
    dev.f_max_hz = dev.profile->default_f_max_hz;
    dev.kappa_w_per_cps3 = dev.profile->default_kappa_w_per_cps3;
    dev.epsilon = cfg.epsilon_per_device ? (*cfg.epsilon_per_device)[static_cast<size_t>(n)]
                                         : cfg.epsilon;
    dev.deadline_s = cfg.deadline_per_device_s
                         ? (*cfg.deadline_per_device_s)[static_cast<size_t>(n)]
                         : cfg.deadline_s;
    dev.validate();
    devices.push_back(std::move(dev));
  }
  return devices;
}

namespace {
ScenarioConfig scenario_from_json(const json& j);
}  // namespace

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

namespace {

ScenarioConfig scenario_from_json(const json& j) {
  const std::string ctx = "scenario";
  reject_unknown(j,
                 {"n_devices", "area_half_width_m", "bandwidth_hz", "profile", "profile_per_device",
                  "epsilon", "epsilon_per_device", "deadline_s", "deadline_per_device_s",
                  "tx_power_w", "noise_psd_w_per_hz", "min_distance_m", "master_seed"},
                 ctx);
  ScenarioConfig cfg;
  EDGEPART_REQUIRE(j.contains("n_devices"), ConfigError, "scenario.n_devices is required");
  cfg.n_devices = static_cast<int>(num_at(j, "n_devices", ctx));
  if (j.contains("area_half_width_m")) cfg.area_half_width_m = num_at(j, "area_half_width_m", ctx);
  EDGEPART_REQUIRE(j.contains("bandwidth_hz"), ConfigError, "scenario.bandwidth_hz is required");
  cfg.bandwidth_hz = num_at(j, "bandwidth_hz", ctx);
  if (j.contains("profile")) {
    EDGEPART_REQUIRE(j.at("profile").is_string(), ConfigError, "scenario.profile must be a string");
    cfg.profile = j.at("profile").get<std::string>();
  }
  if (j.contains("profile_per_device")) {
    std::vector<std::string> names;
    for (const json& v : j.at("profile_per_device")) names.push_back(v.get<std::string>());
    cfg.profile_per_device = names;
  }
  if (j.contains("epsilon")) cfg.epsilon = num_at(j, "epsilon", ctx);
  if (j.contains("epsilon_per_device")) cfg.epsilon_per_device = vec_at(j, "epsilon_per_device", ctx);
  if (j.contains("deadline_s")) cfg.deadline_s = num_at(j, "deadline_s", ctx);
  if (j.contains("deadline_per_device_s"))
    cfg.deadline_per_device_s = vec_at(j, "deadline_per_device_s", ctx);
  if (j.contains("tx_power_w")) cfg.tx_power_w = num_at(j, "tx_power_w", ctx);
  if (j.contains("noise_psd_w_per_hz")) cfg.noise_psd_w_per_hz = num_at(j, "noise_psd_w_per_hz", ctx);
  if (j.contains("min_distance_m")) cfg.min_distance_m = num_at(j, "min_distance_m", ctx);
  if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<uint64_t>();
  cfg.validate();
  return cfg;
}

PccpConfig pccp_from_json(const json& j) {
  reject_unknown(j, {"rho0", "nu", "rho_max", "theta_err", "max_iters", "round_threshold"},
                 "pccp");
  PccpConfig cfg;
  if (j.contains("rho0")) cfg.rho0 = num_at(j, "rho0", "pccp");
  if (j.contains("nu")) cfg.nu = num_at(j, "nu", "pccp");
  if (j.contains("rho_max")) cfg.rho_max = num_at(j, "rho_max", "pccp");
  if (j.contains("theta_err")) cfg.theta_err = num_at(j, "theta_err", "pccp");
  if (j.contains("max_iters")) cfg.max_iters = static_cast<int>(num_at(j, "max_iters", "pccp"));
  if (j.contains("round_threshold")) cfg.round_threshold = num_at(j, "round_threshold", "pccp");
  cfg.validate();
  return cfg;
}

OrchestratorConfig orchestrator_from_json(const json& j, const std::string& ctx) {
  reject_unknown(j, {"policy", "initial_point", "initial_points", "pccp", "outer_tol", "max_outer"},
                 ctx);
  OrchestratorConfig cfg;
  if (j.contains("pccp")) cfg.pccp = pccp_from_json(j.at("pccp"));
  if (j.contains("outer_tol")) cfg.outer_tol = num_at(j, "outer_tol", ctx);
  if (j.contains("max_outer")) cfg.max_outer = static_cast<int>(num_at(j, "max_outer", ctx));
  if (j.contains("initial_point"))
    cfg.initial_point = static_cast<int>(num_at(j, "initial_point", ctx));
  if (j.contains("initial_points")) {
    std::vector<int> pts;
    for (const json& v : j.at("initial_points")) pts.push_back(v.get<int>());
    cfg.initial_points = pts;
  }
  return cfg;
}

struct ParsedConfig {
  json raw;
  ScenarioConfig scenario;
  bool has_scenario = false;
  json solve_section;
  json sweep_section;
  json evaluate_section;
  json fit_section;
};

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  EDGEPART_REQUIRE(in.good(), ConfigError, "cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  ParsedConfig out;
  try {
    out.raw = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(out.raw, {"scenario", "solve", "sweep", "evaluate", "fit"}, "config");
  if (out.raw.contains("scenario")) {
    out.scenario = scenario_from_json(out.raw.at("scenario"));
    out.has_scenario = true;
  }
  if (out.raw.contains("solve")) out.solve_section = out.raw.at("solve");
  if (out.raw.contains("sweep")) out.sweep_section = out.raw.at("sweep");
  if (out.raw.contains("evaluate")) out.evaluate_section = out.raw.at("evaluate");
  if (out.raw.contains("fit")) out.fit_section = out.raw.at("fit");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  EDGEPART_REQUIRE(out.good(), ConfigError, "cannot write " + path.string());
  out << text;
}

void print_probe_report(const std::vector<DeviceScenario>& devices, double bandwidth_hz,
                        std::ostream& os) {
  os << "device,best_point,min_deadline_ms,deadline_ms\n";
  for (const DeviceScenario& dev : devices) {
    int best = 0;
    double best_d = probe_min_deadline(dev, 0, bandwidth_hz);
    for (int m = 1; m <= dev.profile->max_point(); ++m) {
      const double d = probe_min_deadline(dev, m, bandwidth_hz);
      if (d < best_d) {
        best = m;
        best_d = d;
      }
    }
    os << dev.id << ',' << best << ',' << best_d * 1e3 << ',' << dev.deadline_s * 1e3 << "\n";
  }
}

int run_solve(const ParsedConfig& cfg, const RunOptions& opts,
              const std::filesystem::path& run_dir) {
  EDGEPART_REQUIRE(cfg.has_scenario, ConfigError, "solve needs a scenario section");
  ScenarioConfig scen = cfg.scenario;
  if (opts.seed) scen.master_seed = *opts.seed;
  PolicyKind policy = PolicyKind::robust;
  OrchestratorConfig orc;
  if (!cfg.solve_section.is_null()) {
    orc = orchestrator_from_json(cfg.solve_section, "solve");
    if (cfg.solve_section.contains("policy"))
      policy = policy_from_name(cfg.solve_section.at("policy").get<std::string>());
  }
  const std::vector<DeviceScenario> devices = generate_scenario(scen);
  Solution sol;
  try {
    sol = solve_policy(policy, devices, scen.bandwidth_hz, derive_seed(scen.master_seed, 0), orc);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    print_probe_report(devices, scen.bandwidth_hz, std::cerr);
    return 1;
  }
  std::filesystem::create_directories(run_dir);
  write_text(run_dir / "solution.json", solution_to_json(sol, devices));
  write_pccp_trace_csv(sol.pccp_trace, (run_dir / "trace.csv").string());
  write_text(run_dir / "config.echo.json", cfg.raw.dump(2) + "\n");
  std::cout << "solution energy_j " << sol.expected_energy_j << " written to " << run_dir.string()
            << "\n";
  return 0;
}

int run_sweep(const ParsedConfig& cfg, const RunOptions& opts,
              const std::filesystem::path& run_dir) {
  EDGEPART_REQUIRE(cfg.has_scenario, ConfigError, "sweep needs a scenario section");
  EDGEPART_REQUIRE(!cfg.sweep_section.is_null(), ConfigError, "sweep needs a sweep section");
  ScenarioConfig scen = cfg.scenario;
  if (opts.seed) scen.master_seed = *opts.seed;
  const json& j = cfg.sweep_section;
  reject_unknown(j,
                 {"policies", "epsilon_grid", "deadline_grid_s", "n_samples", "model",
                  "orchestrator"},
                 "sweep");
  SweepSpec spec;
  EDGEPART_REQUIRE(j.contains("policies") && j.at("policies").is_array(), ConfigError,
                   "sweep.policies is required");
  for (const json& v : j.at("policies")) spec.policies.push_back(policy_from_name(v.get<std::string>()));
  if (j.contains("epsilon_grid")) spec.epsilon_grid = vec_at(j, "epsilon_grid", "sweep");
  if (j.contains("deadline_grid_s")) spec.deadline_grid_s = vec_at(j, "deadline_grid_s", "sweep");
  if (j.contains("n_samples")) spec.n_samples = static_cast<int>(num_at(j, "n_samples", "sweep"));
  if (j.contains("model"))
    spec.model.kind = sampling_kind_from_name(j.at("model").get<std::string>());
  if (j.contains("orchestrator"))
    spec.orchestrator = orchestrator_from_json(j.at("orchestrator"), "sweep.orchestrator");
  spec.master_seed = scen.master_seed;
  spec.jobs = opts.jobs;
  const std::vector<DeviceScenario> devices = generate_scenario(scen);
  const std::string run_id = run_dir.filename().string();
  const std::string csv = sweep_csv(devices, scen.bandwidth_hz, spec, run_id);
  std::filesystem::create_directories(run_dir);
  write_text(run_dir / "sweep.csv", csv);
  write_text(run_dir / "config.echo.json", cfg.raw.dump(2) + "\n");
  std::cout << "sweep written to " << (run_dir / "sweep.csv").string() << "\n";
  return 0;
}

int run_evaluate(const ParsedConfig& cfg, const RunOptions& opts,
                 const std::filesystem::path& run_dir) {
  EDGEPART_REQUIRE(cfg.has_scenario, ConfigError, "evaluate needs a scenario section");
  EDGEPART_REQUIRE(!cfg.evaluate_section.is_null(), ConfigError,
                   "evaluate needs an evaluate section");
  ScenarioConfig scen = cfg.scenario;
  if (opts.seed) scen.master_seed = *opts.seed;
  const json& j = cfg.evaluate_section;
  reject_unknown(j, {"policy", "n_samples", "model", "orchestrator"}, "evaluate");
  PolicyKind policy = PolicyKind::robust;
  if (j.contains("policy")) policy = policy_from_name(j.at("policy").get<std::string>());
  int n_samples = 100000;
  if (j.contains("n_samples")) n_samples = static_cast<int>(num_at(j, "n_samples", "evaluate"));
  SamplingModel model;
  if (j.contains("model")) model.kind = sampling_kind_from_name(j.at("model").get<std::string>());
  OrchestratorConfig orc;
  if (j.contains("orchestrator"))
    orc = orchestrator_from_json(j.at("orchestrator"), "evaluate.orchestrator");

  const std::vector<DeviceScenario> devices = generate_scenario(scen);
  Solution sol;
  EvaluationReport rep;
  try {
    sol = solve_policy(policy, devices, scen.bandwidth_hz, derive_seed(scen.master_seed, 0), orc);
    rep = evaluate(sol, devices, model, n_samples, derive_seed(scen.master_seed, 1),
                   run_dir.filename().string());
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    print_probe_report(devices, scen.bandwidth_hz, std::cerr);
    return 1;
  }
  json out;
  out["policy"] = rep.policy;
  out["scenario"] = rep.scenario_id;
  out["n_samples"] = rep.n_samples;
  out["violation_per_device"] = rep.violation_per_device;
  out["violation_aggregate"] = rep.violation_aggregate;
  out["mean_realized_energy_j"] = rep.mean_realized_energy_j;
  out["expected_energy_j"] = rep.expected_energy_j;
  out["seed"] = rep.seed;
  out["warnings"] = rep.warnings;
  std::filesystem::create_directories(run_dir);
  write_text(run_dir / "report.json", out.dump(2) + "\n");
  write_text(run_dir / "solution.json", solution_to_json(sol, devices));
  write_text(run_dir / "config.echo.json", cfg.raw.dump(2) + "\n");
  std::cout << "evaluation written to " << (run_dir / "report.json").string() << "\n";
  return 0;
}

int run_fit(const ParsedConfig& cfg, const std::filesystem::path& run_dir) {
  EDGEPART_REQUIRE(!cfg.fit_section.is_null(), ConfigError, "fit needs a fit section");
  const json& j = cfg.fit_section;
  reject_unknown(j,
                 {"trace_csv", "name", "f_min_hz", "f_max_hz", "kappa_w_per_cps3",
                  "workloads_flops", "out_data_bits", "vm_throughput_flops_per_s"},
                 "fit");
  for (const char* key : {"trace_csv", "name"})
    EDGEPART_REQUIRE(j.contains(key), ConfigError, std::string("fit.") + key + " is required");
  for (const char* key : {"f_min_hz", "f_max_hz", "kappa_w_per_cps3"})
    EDGEPART_REQUIRE(j.contains(key), ConfigError, std::string("fit.") + key + " is required");
  EDGEPART_REQUIRE(j.contains("workloads_flops") && j.contains("out_data_bits"), ConfigError,
                   "fit.workloads_flops and fit.out_data_bits are required");

  const Vec workloads = vec_at(j, "workloads_flops", "fit");
  const Vec data_bits = vec_at(j, "out_data_bits", "fit");
  EDGEPART_REQUIRE(workloads.size() + 1 == data_bits.size(), ConfigError,
                   "fit: out_data_bits must list one more entry (the raw input) than "
                   "workloads_flops");
  DnnProfile prof;
  prof.name = j.at("name").get<std::string>();
  prof.num_blocks = static_cast<int>(workloads.size());
  prof.default_f_min_hz = num_at(j, "f_min_hz", "fit");
  prof.default_f_max_hz = num_at(j, "f_max_hz", "fit");
  prof.default_kappa_w_per_cps3 = num_at(j, "kappa_w_per_cps3", "fit");
  if (j.contains("vm_throughput_flops_per_s"))
    prof.vm_throughput_flops_per_s = num_at(j, "vm_throughput_flops_per_s", "fit");

  const TimingTrace trace = load_trace_csv(j.at("trace_csv").get<std::string>(),
                                           prof.default_f_min_hz, prof.default_f_max_hz);
  std::ostringstream fit_report;
  fit_report << "point,g_flops_per_cycle,residual_sq_s2,local_var_s2\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int m = 0; m <= prof.num_blocks; ++m) {
    BlockStats b;
    b.point = m;
    b.out_data_bits = data_bits[static_cast<size_t>(m)];
    b.cum_workload_flops = m == 0 ? 0.0 : workloads[static_cast<size_t>(m) - 1];
    b.vm_mean_s = nan;
    b.vm_var_s2 = nan;
    if (m > 0) {
      const ThroughputFit fit = fit_throughput(trace, m, b.cum_workload_flops);
      b.throughput_flops_per_cycle = fit.g;
      b.local_var_s2 = estimate_variance(trace, m);
      fit_report << m << ',' << fit.g << ',' << fit.residual_sq << ',' << b.local_var_s2 << "\n";
    }
    prof.points.push_back(b);
  }
  apply_default_vm_stats(prof);
  apply_diagonal_covariance(prof);
  prof.validate();
  std::filesystem::create_directories(run_dir);
  save_profile(prof, (run_dir / "profile.json").string());
  write_text(run_dir / "fit_report.csv", fit_report.str());
  write_text(run_dir / "config.echo.json", cfg.raw.dump(2) + "\n");
  std::cout << "fitted profile written to " << (run_dir / "profile.json").string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const RunOptions& opts) {
  try {
    EDGEPART_REQUIRE(opts.command == "solve" || opts.command == "sweep" ||
                         opts.command == "evaluate" || opts.command == "fit",
                     ConfigError, "unknown command: " + opts.command);
    const ParsedConfig cfg = load_config(opts.config_path);
    const uint64_t seed = opts.seed ? *opts.seed : (cfg.has_scenario ? cfg.scenario.master_seed : 1);
    const std::filesystem::path run_dir =
        std::filesystem::path(opts.out_dir) / (opts.command + "-s" + std::to_string(seed));
    if (opts.command == "solve") return run_solve(cfg, opts, run_dir);
    if (opts.command == "sweep") return run_sweep(cfg, opts, run_dir);
    if (opts.command == "evaluate") return run_evaluate(cfg, opts, run_dir);
    return run_fit(cfg, run_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace edgepart
