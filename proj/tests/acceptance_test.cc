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

// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "memclock/harness/config.h"
#include "memclock/harness/experiments.h"
#include "memclock/harness/identity_suite.h"
#include "memclock/harness/output.h"

namespace {

using namespace memclock;
using namespace memclock::harness;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

Outcome identity_suite() {
  const IdentitySuiteResult r = run_identity_suite();
  std::ostringstream os;
  os << "steps=" << r.total_steps << " max_residual/(1+|D|)=" << num(r.max_normalized_residual)
     << " seconds=" << num(r.seconds);
  for (const IdentityFamily& f : r.families) os << " " << f.name << "=" << num(f.max_normalized_residual);
  return {r.total_steps >= 1000 && r.max_normalized_residual <= 1e-10 && r.seconds < 10.0,
          os.str()};
}

Outcome flow_conservation() {
  const DecayCheckResult r = run_decay_check(default_config(ExperimentKind::decay_check));
  bool ok = !r.conservation.empty();
  std::ostringstream os;
  for (const ConservationCase& c : r.conservation) {
    os << c.model << " ratios=";
    for (double ratio : c.drift_ratios) {
      os << num(ratio) << ";";
      ok = ok && ratio >= 8.0;
    }
    os << " ";
  }
  return {ok, os.str()};
}

Outcome decay_law() {
  const DecayCheckResult r = run_decay_check(default_config(ExperimentKind::decay_check));
  bool ok = !r.decay.empty();
  std::ostringstream os;
  for (const DecayCase& c : r.decay) {
    const double rel = std::abs(c.observed_ratio / std::exp(-1.0) - 1.0);
    os << c.model << " ratio=" << num(c.observed_ratio) << " rel_error=" << num(rel)
       << " matrix_rel_error=" << num(c.rel_error) << " ";
    ok = ok && rel <= 1e-6 && c.rel_error <= 1e-6;
  }
  return {ok, os.str()};
}

Outcome norm_law() {
  const ExperimentConfig c = default_config(ExperimentKind::norm_law);
  const NormLawResult r = run_norm_law(c);
  bool ok = r.cases.size() == 20;
  std::ostringstream os;
  os << "eta=" << num(c.norm_law.eta) << " max_rel_error=" << num(r.max_rel_error);
  for (const NormLawCase& k : r.cases) {
    ok = ok && k.converged && k.final_loss < 1e-16 && k.rel_error <= 1e-5;
    if (k.d0 == -35.0) os << " D0=-35 rel_error=" << num(k.rel_error);
  }
  int within = 0;
  for (const NormLawCase& k : r.cases) within += k.rel_error <= 1e-5;
  os << " cases_within_1e-5=" << within << "/" << r.cases.size();
  return {ok, os.str()};
}

Outcome figure7() {
  const Figure7Result r = run_figure7(default_config(ExperimentKind::figure7));
  std::ostringstream os;
  for (const Figure7Run& run : r.runs) {
    os << run.panel << "(eta=" << num(run.eta) << ")D=" << num(run.result.final_d) << " ";
  }
  return {r.runs.size() == 8 && all_passed(r.checks), os.str()};
}

Outcome clock_table() {
  const ClockTableResult r = run_clock_table(default_config(ExperimentKind::clock_table));
  const double targets[] = {7.32e-4, 1.22e-2, 4.69, 0.9375, 4.69};
  bool ok = r.rows.size() == 5;
  std::ostringstream os;
  for (std::size_t i = 0; ok && i < r.rows.size(); ++i) {
    const double rel = std::abs(r.rows[i].value / targets[i] - 1.0);
    ok = ok && rel <= 0.01 && r.rows[i].rounds_to_quoted;
    os << r.rows[i].spec.label << "=" << num(r.rows[i].value) << " (quoted "
       << num(r.rows[i].spec.quoted) << ") ";
  }
  return {ok, os.str()};
}

Outcome leakage_slopes() {
  const LeakageOrderResult r = run_leakage_order(default_config(ExperimentKind::leakage_order));
  const bool ok = r.points.size() == 8 && std::abs(r.euclidean_fit.slope - 2.0) <= 0.1 &&
                  std::abs(r.preconditioned_fit.slope - 1.0) <= 0.1;
  return {ok, "euclidean_slope=" + num(r.euclidean_fit.slope) +
                  " preconditioned_slope=" + num(r.preconditioned_fit.slope)};
}

Outcome minibatch_clock() {
  const MinibatchResult r = run_minibatch_clock(default_config(ExperimentKind::minibatch_clock));
  const bool ok = r.points.size() == 5 && r.max_inverse_b_deviation <= 0.25 &&
                  r.max_eta_deviation <= 0.25;
  return {ok, "inverse_b_deviation=" + num(r.max_inverse_b_deviation) +
                  " eta_squared_deviation=" + num(r.max_eta_deviation)};
}

std::vector<std::string> csv_files(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.path().extension() == ".csv") {
      names.push_back(std::filesystem::relative(e.path(), dir).string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

Outcome determinism() {
  ExperimentConfig sweep = default_config(ExperimentKind::sigma_sweep);
  sweep.optimizer.algorithm = Algorithm::sgd;
  sweep.task.sampling = Sampling::seeded_uniform;
  sweep.task.batch_size = 4;
  sweep.steps = 500;
  sweep.threads = 3;
  ExperimentConfig fig = default_config(ExperimentKind::figure7);
  fig.figure7.sgd_steps = 2000;
  fig.figure7.adam_steps = 500;
  fig.figure7.minibatch_adam_steps = 2000;

  const auto root = std::filesystem::temp_directory_path() / "memclock_acceptance";
  std::filesystem::remove_all(root);
  for (const char* rerun : {"first", "second"}) {
    run_experiment(sweep, (root / rerun / "sweep").string());
    run_experiment(fig, (root / rerun / "figure7").string());
  }
  const auto first = csv_files(root / "first"), second = csv_files(root / "second");
  bool ok = !first.empty() && first == second;
  for (std::size_t i = 0; ok && i < first.size(); ++i) {
    ok = read_text((root / "first" / first[i]).string()) ==
         read_text((root / "second" / second[i]).string());
  }
  std::filesystem::remove_all(root);
  return {ok, "compared_csv_files=" + std::to_string(first.size())};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double max_seconds;
  };
  const std::vector<Criterion> criteria = {
      {"identity_suite", identity_suite, 10.0},
      {"flow_conservation", flow_conservation, 5.0},
      {"l2_decay_law", decay_law, 1.0},
      {"scalar_norm_law", norm_law, 30.0},
      {"figure7_reproduction", figure7, 120.0},
      {"clock_table", clock_table, 1.0},
      {"leakage_order_slopes", leakage_slopes, 2.0},
      {"minibatch_clock", minibatch_clock, 60.0},
      {"determinism", determinism, 60.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.passed && secs >= criteria[i].max_seconds) {
      o.passed = false;
      o.detail += " exceeded " + num(criteria[i].max_seconds) + "s";
    }
    failures += !o.passed;
    std::printf("%s %zu %s (%.2fs) %s\n", o.passed ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), secs, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
