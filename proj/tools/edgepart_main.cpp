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

#include <string>

#include "CLI11.hpp"

#include "edgepart/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Robust DNN partitioning and bandwidth/frequency allocation simulator"};
  edgepart::RunOptions opts;
  uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", opts.config_path, "Path to the JSON configuration")->required();
  app.add_option("--command", opts.command, "One of: solve, sweep, fit, evaluate")->required();
  app.add_option("--seed", seed, "Master seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--jobs", opts.jobs, "Parallel sweep cells")->default_val(1);
  app.add_option("--out", opts.out_dir, "Output directory")->default_val("out");
  CLI11_PARSE(app, argc, argv);
  if (seed_set) opts.seed = seed;
  return edgepart::run_cli(opts);
}
