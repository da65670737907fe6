// Copyright 2026 The dpstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdio>

#include "cli.hpp"
#include "dpstore/mapping.hpp"

namespace dpstore::cli {

namespace {

struct SimulateOptions {
  std::uint64_t n = 0;
  std::uint32_t t = 4;
  double phi_exponent = 1.5;
  std::uint64_t trials = 1;
  std::uint64_t seed = 1;
};

void run_simulate(const SimulateOptions& o) {
  const auto layout = mapping::layout_for(o.n, o.t, o.phi_exponent);
  const auto rows = mapping::simulate(layout, o.trials, o.seed);

  std::printf("trial,super_root_load,max_height_used");
  for (std::uint32_t h = 0; h < layout.levels; ++h) std::printf(",H_%u", h);
  std::printf("\n");
  bool any_full = false;
  for (const auto& row : rows) {
    any_full = any_full || row.full;
    std::printf("%llu,%llu,%d", static_cast<unsigned long long>(row.trial),
                static_cast<unsigned long long>(row.super_root_load), row.max_height_used);
    for (std::uint32_t h = 0; h < layout.levels; ++h) {
      const auto count = h < row.histogram.size() ? row.histogram[h] : 0;
      std::printf(",%llu", static_cast<unsigned long long>(count));
    }
    std::printf("\n");
  }
  std::fprintf(stderr, "L=%llu trees=%llu levels=%u t=%u phi=%llu\n",
               static_cast<unsigned long long>(layout.L),
               static_cast<unsigned long long>(layout.trees), layout.levels, layout.t,
               static_cast<unsigned long long>(layout.phi));
  if (any_full) {
    std::fprintf(stderr, "a trial overflowed the super root\n");
    exit_with(kExitCheckFailed);
  }
}

}  // namespace

void add_maptool(CLI::App& app) {
  auto* cmd = app.add_subcommand("maptool", "Tree-forest two-choice hashing tools");
  cmd->require_subcommand(1);

  auto sim = std::make_shared<SimulateOptions>();
  auto* s = cmd->add_subcommand("simulate", "Insert n random keys per trial; CSV of loads");
  s->add_option("--n", sim->n, "Capacity (at least 16)")->required();
  s->add_option("--t", sim->t, "Slots per node")->capture_default_str()->check(CLI::Range(1, 255));
  s->add_option("--phi-exp", sim->phi_exponent, "Super root holds ceil(log2(n)^P) keys")
      ->capture_default_str();
  s->add_option("--trials", sim->trials, "Independent trials")->capture_default_str();
  s->add_option("--seed", sim->seed, "Randomness seed")->capture_default_str();
  s->callback([sim] { run_simulate(*sim); });
}

}  // namespace dpstore::cli
