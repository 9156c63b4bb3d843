// Copyright 2026 The Timely Authors
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

#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "harness/harness.hpp"

namespace h = timely::harness;

int main(int argc, char** argv) {
  CLI::App app{"Timely-throughput experiments on multi-hop wireless networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  int threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  bool verbose = false;

  const h::CommandInfo* chosen = nullptr;
  for (const auto& info : h::commands()) {
    auto* sub = app.add_subcommand(std::string(info.name), std::string(info.description));
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--seeds", seeds, "Seed list, e.g. 1,2,3 or 1-5 (overrides seeds)");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose-trace", verbose, "Also write per-run slot traces");
    sub->callback([&chosen, &info] { chosen = &info; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const auto config = h::load_config(config_path);
    h::RunOptions options;
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (!seeds.empty()) options.seeds = h::parse_seed_list(seeds);
    options.threads = threads;
    options.verbose_trace = verbose;
    const auto result = chosen->run(config, options);
    for (const auto& f : result.files) {
      if (f.extension() == ".csv" || f.filename() == "solution.json") std::cout << f.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "timely: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
