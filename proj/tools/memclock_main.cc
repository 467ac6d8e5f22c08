// Copyright 2026 The memclock Authors. All Rights Reserved.
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

// memclock: runs the linear-lab experiments from a JSON config.
//
//   memclock <verify|clocks|figure7|sweep|leakage|run> [--config PATH] [--out DIR]
//            [--threads N] [--seed-override S] [--dump-config]
//
// Exit status is 0 when every check passes, 1 when a check fails and 2 on
// usage, config or I/O errors.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "memclock/error.h"
#include "memclock/harness/config.h"
#include "memclock/harness/experiments.h"
#include "memclock/harness/identity_suite.h"
#include "memclock/harness/output.h"

namespace {

using memclock::harness::Check;
using memclock::harness::ExperimentConfig;
using memclock::harness::ExperimentKind;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::size_t threads = 0;
  std::optional<std::uint64_t> seed_override;
  bool dump_config = false;
};

std::string default_out_root() {
  const char* env = std::getenv("MEMCLOCK_OUT_DIR");
  return env && *env ? env : "memclock_out";
}

ExperimentConfig prepare(const Options& opt, ExperimentKind kind, bool force_kind) {
  ExperimentConfig config = opt.config_path.empty()
                                ? memclock::harness::default_config(kind)
                                : memclock::harness::load_config(opt.config_path);
  if (force_kind) config.kind = kind;
  if (opt.threads > 0) config.threads = opt.threads;
  if (opt.seed_override) config.seeds = {*opt.seed_override};
  return config;
}

std::string out_dir_for(const Options& opt, const ExperimentConfig& config,
                        const std::string& name) {
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (!config.output_dir.empty()) return config.output_dir;
  return memclock::harness::join_path(default_out_root(), name);
}

int report(const std::vector<Check>& checks) {
  for (const Check& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  return memclock::harness::all_passed(checks) ? 0 : 1;
}

int run_one(const Options& opt, const std::string& name, ExperimentKind kind,
            bool force_kind) {
  ExperimentConfig config = prepare(opt, kind, force_kind);
  if (opt.dump_config) {
    std::cout << memclock::harness::dump_config(config);
    return 0;
  }
  memclock::harness::validate(config);
  const std::string out = out_dir_for(opt, config, name);
  std::vector<Check> checks;
  memclock::harness::run_experiment(config, out, &checks);
  std::cout << "wrote " << out << "\n";
  return report(checks);
}

int run_verify(const Options& opt) {
  ExperimentConfig config = prepare(opt, ExperimentKind::decay_check, false);
  if (opt.dump_config) {
    std::cout << memclock::harness::dump_config(config);
    return 0;
  }
  const std::string out = out_dir_for(opt, config, "verify");
  std::vector<Check> checks;
  const auto suite = memclock::harness::run_identity_suite();
  memclock::harness::emit_summary(suite.summary,
                                  memclock::harness::join_path(out, "identity_summary.json"));
  checks.insert(checks.end(), suite.checks.begin(), suite.checks.end());
  for (ExperimentKind kind : {ExperimentKind::decay_check, ExperimentKind::leakage_order,
                              ExperimentKind::norm_law}) {
    config.kind = kind;
    memclock::harness::run_experiment(config, out, &checks);
  }
  std::cout << "wrote " << out << "\n";
  return report(checks);
}

int run_leakage(const Options& opt) {
  ExperimentConfig config = prepare(opt, ExperimentKind::leakage_order, true);
  if (opt.dump_config) {
    std::cout << memclock::harness::dump_config(config);
    return 0;
  }
  const std::string out = out_dir_for(opt, config, "leakage");
  std::vector<Check> checks;
  memclock::harness::run_experiment(config, out, &checks);
  config.kind = ExperimentKind::minibatch_clock;
  memclock::harness::run_experiment(config, out, &checks);
  std::cout << "wrote " << out << "\n";
  return report(checks);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memclock: imbalance, forgetting clocks and initialization memory in linear models"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Experiment config (JSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir,
                    "Output directory (default: config output_dir, else "
                    "$MEMCLOCK_OUT_DIR/<subcommand>, else memclock_out/<subcommand>)");
    sub->add_option("--threads", opt.threads, "Worker threads for sweeps")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed-override", seed, "Replace the config's seed list with one seed");
    sub->add_flag("--dump-config", opt.dump_config,
                  "Print the effective config and exit");
  };
  CLI::App* verify = app.add_subcommand("verify", "Identity suite, flow checks, leakage order, norm law");
  CLI::App* clocks = app.add_subcommand("clocks", "Forgetting-clock table");
  CLI::App* figure7 = app.add_subcommand("figure7", "Scalar optimizer trajectories");
  CLI::App* sweep = app.add_subcommand("sweep", "sigma_w sweep with Mem and |beta(t)|");
  CLI::App* leakage = app.add_subcommand("leakage", "Leakage-order slopes and the minibatch clock");
  CLI::App* run = app.add_subcommand("run", "Run whatever experiment the config names");
  for (CLI::App* sub : {verify, clocks, figure7, sweep, leakage, run}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed-override")) opt.seed_override = seed;
  }

  try {
    if (verify->parsed()) return run_verify(opt);
    if (clocks->parsed()) return run_one(opt, "clocks", ExperimentKind::clock_table, true);
    if (figure7->parsed()) return run_one(opt, "figure7", ExperimentKind::figure7, true);
    if (sweep->parsed()) return run_one(opt, "sweep", ExperimentKind::sigma_sweep, true);
    if (leakage->parsed()) return run_leakage(opt);
    if (run->parsed()) {
      ExperimentConfig config = prepare(opt, ExperimentKind::sigma_sweep, false);
      return run_one(opt, memclock::harness::kind_name(config.kind), config.kind, false);
    }
  } catch (const memclock::Error& e) {
    std::cerr << "memclock: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "memclock: unexpected error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
