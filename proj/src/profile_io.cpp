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

#include "edgepart/profile_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "edgepart/error.hpp"

namespace edgepart {

using nlohmann::json;

namespace {

double get_num(const json& j, const std::string& key, const std::string& ctx) {
  EDGEPART_REQUIRE(j.contains(key), ConfigError, ctx + ": missing field '" + key + "'");
  EDGEPART_REQUIRE(j.at(key).is_number(), ConfigError, ctx + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    EDGEPART_REQUIRE(known.count(it.key()) > 0, ConfigError,
                     ctx + ": unknown field '" + it.key() + "'");
  }
}

}  // namespace

void apply_default_vm_stats(DnnProfile& profile, double vm_var_ratio) {
  const int top = profile.num_blocks;
  const double w_total = profile.points[static_cast<size_t>(top)].cum_workload_flops;
  double max_vloc = 0.0;
  for (const BlockStats& p : profile.points) max_vloc = std::max(max_vloc, p.local_var_s2);
  for (BlockStats& p : profile.points) {
    if (std::isnan(p.vm_mean_s)) {
      p.vm_mean_s = (w_total - p.cum_workload_flops) / profile.vm_throughput_flops_per_s;
    }
    if (std::isnan(p.vm_var_s2)) {
      p.vm_var_s2 =
          (p.point > 0 && p.point < top) ? vm_var_ratio * max_vloc : 0.0;
    }
  }
}

void apply_diagonal_covariance(DnnProfile& profile) {
  const int n = profile.num_blocks + 1;
  profile.covariance_s2.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const BlockStats& p = profile.points[static_cast<size_t>(i)];
    profile.covariance_s2(i, i) = p.local_var_s2 + p.vm_var_s2;
  }
}

DnnProfile parse_profile_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("profile: invalid JSON: ") + e.what());
  }
  const std::string ctx = "profile";
  reject_unknown(j,
                 {"name", "num_blocks", "default_f_min_hz", "default_f_max_hz",
                  "default_kappa_w_per_cps3", "vm_throughput_flops_per_s", "synthetic_vm_stats",
                  "points", "covariance_s2"},
                 ctx);
  DnnProfile p;
  EDGEPART_REQUIRE(j.contains("name") && j.at("name").is_string(), ConfigError,
                   ctx + ": missing string field 'name'");
  p.name = j.at("name").get<std::string>();
  p.num_blocks = static_cast<int>(get_num(j, "num_blocks", ctx));
  p.default_f_min_hz = get_num(j, "default_f_min_hz", ctx);
  p.default_f_max_hz = get_num(j, "default_f_max_hz", ctx);
  p.default_kappa_w_per_cps3 = get_num(j, "default_kappa_w_per_cps3", ctx);
  if (j.contains("vm_throughput_flops_per_s"))
    p.vm_throughput_flops_per_s = get_num(j, "vm_throughput_flops_per_s", ctx);
  if (j.contains("synthetic_vm_stats")) p.synthetic_vm_stats = j.at("synthetic_vm_stats").get<bool>();

  EDGEPART_REQUIRE(j.contains("points") && j.at("points").is_array(), ConfigError,
                   ctx + ": missing array field 'points'");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const json& jp : j.at("points")) {
    const std::string pctx = ctx + ".points[" + std::to_string(p.points.size()) + "]";
    reject_unknown(jp,
                   {"point", "out_data_bits", "cum_workload_flops", "throughput_flops_per_cycle",
                    "local_var_s2", "vm_mean_s", "vm_var_s2", "time_pad_s", "wc_local_margin_s",
                    "wc_vm_margin_s"},
                   pctx);
    BlockStats b;
    b.point = static_cast<int>(get_num(jp, "point", pctx));
    b.out_data_bits = get_num(jp, "out_data_bits", pctx);
    b.cum_workload_flops = get_num(jp, "cum_workload_flops", pctx);
    b.throughput_flops_per_cycle = get_num(jp, "throughput_flops_per_cycle", pctx);
    b.local_var_s2 = get_num(jp, "local_var_s2", pctx);
    b.vm_mean_s = jp.contains("vm_mean_s") ? get_num(jp, "vm_mean_s", pctx) : nan;
    b.vm_var_s2 = jp.contains("vm_var_s2") ? get_num(jp, "vm_var_s2", pctx) : nan;
    if (jp.contains("time_pad_s")) b.time_pad_s = get_num(jp, "time_pad_s", pctx);
    if (jp.contains("wc_local_margin_s")) b.wc_local_margin_s = get_num(jp, "wc_local_margin_s", pctx);
    if (jp.contains("wc_vm_margin_s")) b.wc_vm_margin_s = get_num(jp, "wc_vm_margin_s", pctx);
    p.points.push_back(b);
  }
  apply_default_vm_stats(p);

  if (j.contains("covariance_s2")) {
    const json& jc = j.at("covariance_s2");
    EDGEPART_REQUIRE(jc.is_array() && jc.size() == p.points.size(), ConfigError,
                     ctx + ": covariance_s2 must be an (M+1)x(M+1) array");
    const int n = static_cast<int>(p.points.size());
    p.covariance_s2.resize(n, n);
    for (int i = 0; i < n; ++i) {
      const json& row = jc.at(static_cast<size_t>(i));
      EDGEPART_REQUIRE(row.is_array() && row.size() == p.points.size(), ConfigError,
                       ctx + ": covariance_s2 row " + std::to_string(i) + " has wrong length");
      for (int k = 0; k < n; ++k) p.covariance_s2(i, k) = row.at(static_cast<size_t>(k)).get<double>();
    }
  } else {
    apply_diagonal_covariance(p);
  }
  p.validate();
  return p;
}

DnnProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  EDGEPART_REQUIRE(in.good(), ConfigError, "cannot open profile file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile_json(ss.str());
}

std::string profile_to_json(const DnnProfile& profile) {
  json j;
  j["name"] = profile.name;
  j["num_blocks"] = profile.num_blocks;
  j["default_f_min_hz"] = profile.default_f_min_hz;
  j["default_f_max_hz"] = profile.default_f_max_hz;
  j["default_kappa_w_per_cps3"] = profile.default_kappa_w_per_cps3;
  j["vm_throughput_flops_per_s"] = profile.vm_throughput_flops_per_s;
  j["synthetic_vm_stats"] = profile.synthetic_vm_stats;
  j["points"] = json::array();
  for (const BlockStats& b : profile.points) {
    json jp;
    jp["point"] = b.point;
    jp["out_data_bits"] = b.out_data_bits;
    jp["cum_workload_flops"] = b.cum_workload_flops;
    jp["throughput_flops_per_cycle"] = b.throughput_flops_per_cycle;
    jp["local_var_s2"] = b.local_var_s2;
    jp["vm_mean_s"] = b.vm_mean_s;
    jp["vm_var_s2"] = b.vm_var_s2;
    if (b.time_pad_s != 0.0) jp["time_pad_s"] = b.time_pad_s;
    if (b.wc_local_margin_s) jp["wc_local_margin_s"] = *b.wc_local_margin_s;
    if (b.wc_vm_margin_s) jp["wc_vm_margin_s"] = *b.wc_vm_margin_s;
    j["points"].push_back(jp);
  }
  json jc = json::array();
  for (int i = 0; i < profile.covariance_s2.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < profile.covariance_s2.cols(); ++k) row.push_back(profile.covariance_s2(i, k));
    jc.push_back(row);
  }
  j["covariance_s2"] = jc;
  return j.dump(2) + "\n";
}

void save_profile(const DnnProfile& profile, const std::string& path) {
  std::ofstream out(path);
  EDGEPART_REQUIRE(out.good(), ConfigError, "cannot write profile file: " + path);
  out << profile_to_json(profile);
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace edgepart
