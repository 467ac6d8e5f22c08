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

#include "memclock/harness/experiments.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "memclock/conservation.h"
#include "memclock/error.h"
#include "memclock/flow.h"
#include "memclock/harness/output.h"
#include "memclock/rng.h"
#include "memclock/schedule.h"

namespace memclock::harness {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json base_summary(const ExperimentConfig& config) {
  return {{"kind", kind_name(config.kind)},
          {"config", to_json(config)},
          {"git_describe", git_describe()},
          {"per_run", json::array()},
          {"mem_spread", nullptr}};
}

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, x);
  return buf;
}

Check range_check(std::string name, double x, double lo, double hi) {
  return {std::move(name), x >= lo && x <= hi,
          fmt("%.6g", x) + " in [" + fmt("%g", lo) + ", " + fmt("%g", hi) + "]"};
}

Check below_check(std::string name, double x, double limit) {
  return {std::move(name), x < limit, fmt("%.6g", x) + " < " + fmt("%g", limit)};
}

double frobenius_total(const std::vector<Matrix>& pairs) {
  double s = 0.0;
  for (const Matrix& m : pairs) s += squared_frobenius_norm(m);
  return std::sqrt(s);
}

std::vector<Matrix> imbalance_change(const ModelState& before, const ModelState& after) {
  const ImbalanceRecord a = imbalance(before);
  const ImbalanceRecord b = imbalance(after);
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < a.pairs.size(); ++j) out.push_back(b.pairs[j] - a.pairs[j]);
  return out;
}

void write_run_files(const TrajectoryResult& run, const std::string& out_dir,
                     const std::string& stem) {
  if (out_dir.empty()) return;
  emit_csv(run.rows, join_path(out_dir, stem + ".csv"));
  write_text(join_path(out_dir, stem + "_detail.csv"), detail_csv(run.rows));
}

void finish_summary(json& summary, const std::vector<Check>& checks,
                    Clock::time_point start, const std::string& out_dir,
                    const std::string& name) {
  summary["checks"] = checks_json(checks);
  summary["wall_time_s"] = seconds_since(start);
  if (!out_dir.empty()) emit_summary(summary, join_path(out_dir, name));
}

std::string eta_tag(double eta) { return "eta" + format_double(eta); }

}  // namespace

json checks_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const Check& c : checks) {
    out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return out;
}

bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

// ---------------------------------------------------------------------------
// Figure 7: the scalar model (a, b) from (1, 6) under GD, cyclic SGD, Adam and
// minibatch Adam.

Figure7Result run_figure7(const ExperimentConfig& config, const std::string& out_dir) {
  const auto start = Clock::now();
  const Figure7Config& f = config.figure7;
  const std::uint64_t sampler_seed = config.seeds.empty() ? 0 : config.seeds.front();
  Figure7Result out;

  struct Panel {
    const char* name;
    Algorithm algorithm;
    std::vector<double> targets;
    Sampling sampling;
    std::int64_t steps;
  };
  const std::vector<Panel> panels = {
      {"a", Algorithm::gd, {f.full_batch_target}, Sampling::full_batch, f.gd_steps},
      {"b", Algorithm::sgd, f.targets, Sampling::cyclic, f.sgd_steps},
      {"c", Algorithm::adam, {f.full_batch_target}, Sampling::full_batch, f.adam_steps},
      {"d", Algorithm::adam, f.targets, f.adam_sampling, f.minibatch_adam_steps},
  };

  for (const Panel& p : panels) {
    if (p.steps <= 0) continue;
    for (double eta : f.etas) {
      RunSpec spec;
      spec.init = ScalarState{f.a0, f.b0};
      spec.task = QuadraticTask::scalar(p.targets, p.sampling,
                                        p.sampling == Sampling::full_batch ? 0 : 1,
                                        sampler_seed);
      spec.optimizer = config.optimizer;
      spec.optimizer.algorithm = p.algorithm;
      spec.optimizer.lambda = 0.0;
      spec.optimizer.schedule = constant_schedule(eta, p.steps);
      spec.steps = p.steps;
      spec.record_stride = config.record_stride;
      spec.sigma_w = 1.0;
      spec.seed = sampler_seed;
      spec.threshold = f.threshold;

      Figure7Run run;
      run.panel = p.name;
      run.optimizer = p.algorithm == Algorithm::adam ? "adam"
                      : p.algorithm == Algorithm::sgd ? "sgd"
                                                      : "gd";
      run.eta = eta;
      run.sampling = p.sampling;
      run.steps = p.steps;
      run.file = "figure7_" + std::string(p.name) + "_" + eta_tag(eta);
      run.result = run_trajectory(spec);
      write_run_files(run.result, out_dir, run.file);
      out.runs.push_back(std::move(run));
    }
  }

  json summary = base_summary(config);
  for (const Figure7Run& run : out.runs) {
    json entry = run_entry(run.result, 1.0, sampler_seed);
    entry["panel"] = run.panel;
    entry["optimizer"] = run.optimizer;
    entry["eta"] = run.eta;
    entry["steps"] = run.steps;
    entry["last_delta_d"] = run.result.last_delta_d;
    entry["first_below_threshold"] = run.result.first_below_threshold
                                         ? json(*run.result.first_below_threshold)
                                         : json(nullptr);
    entry["file"] = run.file + ".csv";
    summary["per_run"].push_back(entry);

    const std::string tag = "figure7_" + run.panel + "_" + eta_tag(run.eta);
    if (run.result.status != "ok") {
      out.checks.push_back({tag, false, "run diverged: " + run.result.failure});
      continue;
    }
    const double d = run.result.final_d;
    if (run.panel == "a") {
      // The caption's two step sizes: near initialization vs. pulled toward balance.
      if (std::abs(run.eta - 0.01) < 1e-12) out.checks.push_back(range_check(tag, d, -36, -33));
      if (std::abs(run.eta - 0.04) < 1e-12) out.checks.push_back(range_check(tag, d, -5, -1));
    } else if (run.panel == "b" || run.panel == "d") {
      out.checks.push_back(below_check(tag, std::abs(d), f.threshold));
    } else if (run.panel == "c") {
      out.checks.push_back(range_check(tag, d, -30, -24));
      out.checks.push_back(below_check(tag + "_stall", run.result.last_delta_d, 1e-6));
    }
  }
  finish_summary(summary, out.checks, start, out_dir, "figure7_summary.json");
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------------------
// Clock table.

double round_to_quoted_precision(double value, double quoted) {
  if (quoted == 0.0 || !std::isfinite(quoted)) return value;
  // Fewest significant digits that reproduce the quoted number.
  int digits = 1;
  for (; digits < 17; ++digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, quoted);
    if (std::strtod(buf, nullptr) == quoted) break;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, value);
  return std::strtod(buf, nullptr);
}

ClockTableResult run_clock_table(const ExperimentConfig& config, const std::string& out_dir) {
  const auto start = Clock::now();
  const ClockTableConfig& t = config.clock_table;
  ClockTableResult out;
  std::string csv = "label,epochs,batch,eta,lambda,steps,t_sgd,t_l2,t_adapt,clock,value,quoted\n";
  for (const ClockCase& c : t.cases) {
    ClockRow row;
    row.spec = c;
    const double k = c.epochs * static_cast<double>(t.n_train) / static_cast<double>(c.batch);
    row.steps = static_cast<std::int64_t>(std::llround(k));
    row.clocks = compute_clocks(constant_schedule(c.eta, std::max<std::int64_t>(row.steps, 1)),
                                static_cast<double>(c.batch), c.lambda, row.steps);
    row.value = c.clock == "t_sgd"  ? row.clocks.t_sgd
                : c.clock == "t_l2" ? row.clocks.t_l2
                                    : row.clocks.t_adapt;
    row.rel_to_quoted = c.quoted != 0.0 ? std::abs(row.value - c.quoted) / std::abs(c.quoted)
                                        : std::abs(row.value);
    row.rounds_to_quoted = round_to_quoted_precision(row.value, c.quoted) == c.quoted;
    out.checks.push_back({"clock_" + c.label, row.rounds_to_quoted,
                          c.clock + " = " + fmt("%.6g", row.value) + ", quoted " +
                              fmt("%g", c.quoted) + ", rel diff " +
                              fmt("%.3g", row.rel_to_quoted)});
    csv += c.label + "," + format_double(c.epochs) + "," + std::to_string(c.batch) + "," +
           format_double(c.eta) + "," + format_double(c.lambda) + "," +
           std::to_string(row.steps) + "," + format_double(row.clocks.t_sgd) + "," +
           format_double(row.clocks.t_l2) + "," + format_double(row.clocks.t_adapt) + "," +
           c.clock + "," + format_double(row.value) + "," + format_double(c.quoted) + "\n";
    out.rows.push_back(std::move(row));
  }
  json summary = base_summary(config);
  summary["table"] = json::array();
  for (const ClockRow& r : out.rows) {
    summary["table"].push_back({{"label", r.spec.label},
                                {"steps", r.steps},
                                {"clock", r.spec.clock},
                                {"value", r.value},
                                {"quoted", r.spec.quoted},
                                {"rel_to_quoted", r.rel_to_quoted},
                                {"rounds_to_quoted", r.rounds_to_quoted}});
  }
  if (!out_dir.empty()) write_text(join_path(out_dir, "clock_table.csv"), csv);
  finish_summary(summary, out.checks, start, out_dir, "clock_table_summary.json");
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------------------
// Leakage order: one step from a fixed state over a log grid of step sizes.

LeakageOrderResult run_leakage_order(const ExperimentConfig& config,
                                     const std::string& out_dir) {
  const auto start = Clock::now();
  const LeakageConfig& l = config.leakage;
  if (l.points < 4) throw DomainError("run_leakage_order: need >= 4 step sizes");
  if (config.model.kind == ModelKind::scalar) {
    throw DomainError("run_leakage_order: needs a matrix model");
  }
  const ModelState state =
      init_state({l.sigma_w, l.state_seed, InitScheme::fan_in_normal, {}},
                 model_shape(config.model));
  const QuadraticTask task = build_task(config, 0).resampled(Sampling::full_batch, 0, 0);

  LeakageOrderResult out;
  std::vector<double> etas, euclid, precond;
  const double lo = std::log10(l.eta_min);
  const double hi = std::log10(l.eta_max);
  for (std::size_t i = 0; i < l.points; ++i) {
    const double eta =
        std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(l.points - 1));
    OptimizerSpec gd;
    gd.algorithm = Algorithm::gd;
    gd.schedule = constant_schedule(eta, 1);
    const StepResult g = step_gd(state, task, gd, 0);

    OptimizerSpec pre = gd;
    pre.algorithm = Algorithm::precond_gd;
    pre.preconditioner = l.preconditioner;
    const StepResult p = step_precond(state, task, pre, 0);

    LeakagePoint pt;
    pt.eta = eta;
    pt.euclidean = frobenius_total(imbalance_change(state, g.state));
    pt.preconditioned = frobenius_total(imbalance_change(state, p.state));
    for (double r : leakage_residual(state, g.state, g.record.product_grad, eta)) {
      pt.euclidean_identity_residual = std::max(pt.euclidean_identity_residual, r);
    }
    etas.push_back(eta);
    euclid.push_back(pt.euclidean);
    precond.push_back(pt.preconditioned);
    out.points.push_back(pt);
  }
  out.euclidean_fit = order_fit(etas, euclid);
  out.preconditioned_fit = order_fit(etas, precond);
  out.checks.push_back(range_check("leakage_slope_euclidean", out.euclidean_fit.slope, 1.9, 2.1));
  out.checks.push_back(
      range_check("leakage_slope_preconditioned", out.preconditioned_fit.slope, 0.9, 1.1));

  json summary = base_summary(config);
  summary["euclidean_slope"] = out.euclidean_fit.slope;
  summary["euclidean_half_width"] = out.euclidean_fit.half_width;
  summary["preconditioned_slope"] = out.preconditioned_fit.slope;
  summary["preconditioned_half_width"] = out.preconditioned_fit.half_width;
  if (!out_dir.empty()) {
    std::string csv = "eta,euclidean,preconditioned,euclidean_identity_residual\n";
    for (const LeakagePoint& p : out.points) {
      csv += format_double(p.eta) + "," + format_double(p.euclidean) + "," +
             format_double(p.preconditioned) + "," +
             format_double(p.euclidean_identity_residual) + "\n";
    }
    write_text(join_path(out_dir, "leakage_order.csv"), csv);
  }
  finish_summary(summary, out.checks, start, out_dir, "leakage_summary.json");
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------------------
// Flow studies: L2 decay law and RK4 conservation envelope.

namespace {

struct FlowSubject {
  std::string model;
  ModelState state;
  QuadraticTask task;
};

std::vector<FlowSubject> flow_subjects(const ExperimentConfig& config, std::uint64_t seed) {
  std::vector<std::size_t> dims = config.model.dims;
  if (config.model.kind == ModelKind::scalar || dims.size() < 2) dims = {4, 3, 4};
  const std::size_t d_in = dims.front();
  const std::size_t d_out = dims.back();
  const std::size_t r = dims.size() >= 3 ? dims[1] : std::min(d_in, d_out);
  const QuadraticTask task = planted_regression_task(d_in, d_out, config.task.samples,
                                                    config.task.data_seed, config.task.noise);
  std::vector<FlowSubject> out;
  out.push_back({"two_factor",
                 init_state({1.0, seed, InitScheme::fan_in_normal, {}},
                            {ModelKind::two_factor, {d_in, r, d_out}}),
                 task});
  out.push_back({"deep_linear_l3",
                 init_state({1.0, Rng::derive(seed, 1), InitScheme::fan_in_normal, {}},
                            {ModelKind::deep_linear, {d_in, r, r, d_out}}),
                 task});
  return out;
}

double pair_inner(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const auto x = a[j].entries();
    const auto y = b[j].entries();
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  }
  return s;
}

}  // namespace

DecayCheckResult run_decay_check(const ExperimentConfig& config, const std::string& out_dir) {
  const auto start = Clock::now();
  const DecayConfig& d = config.decay;
  DecayCheckResult out;
  const std::vector<FlowSubject> subjects = flow_subjects(config, d.state_seed);

  for (const FlowSubject& s : subjects) {
    const FlowTrajectory traj = flow_integrate(s.state, s.task, d.lambda, d.t_end, d.h, SIZE_MAX);
    const ImbalanceRecord& d0 = traj.imbalances.front();
    const ImbalanceRecord& d1 = traj.imbalances.back();
    DecayCase c;
    c.model = s.model;
    c.d0_fro = d0.total_frobenius();
    c.predicted_ratio = std::exp(-2.0 * d.lambda * d.t_end);
    c.observed_ratio = pair_inner(d1.pairs, d0.pairs) / pair_inner(d0.pairs, d0.pairs);
    std::vector<Matrix> err;
    for (std::size_t j = 0; j < d0.pairs.size(); ++j) {
      err.push_back(d1.pairs[j] - decay_prediction(d0.pairs[j], d.lambda, d.t_end));
    }
    c.rel_error = frobenius_total(err) / (c.predicted_ratio * c.d0_fro);
    out.checks.push_back(below_check("decay_" + s.model, c.rel_error, 1e-6));
    out.decay.push_back(c);
  }

  for (const FlowSubject& s : subjects) {
    ConservationCase c;
    c.model = s.model;
    c.h = d.conservation_h;
    for (double h : d.conservation_h) {
      const FlowTrajectory traj = flow_integrate(s.state, s.task, 0.0, d.t_end, h, 1);
      const ImbalanceRecord& d0 = traj.imbalances.front();
      double drift = 0.0;
      for (const ImbalanceRecord& rec : traj.imbalances) {
        std::vector<Matrix> diff;
        for (std::size_t j = 0; j < d0.pairs.size(); ++j) {
          diff.push_back(rec.pairs[j] - d0.pairs[j]);
        }
        drift = std::max(drift, frobenius_total(diff));
      }
      c.drift.push_back(drift);
    }
    for (std::size_t i = 0; i + 1 < c.drift.size(); ++i) {
      const double ratio = c.drift[i] / c.drift[i + 1];
      c.drift_ratios.push_back(ratio);
      out.checks.push_back({"conservation_" + s.model + "_halving_" + std::to_string(i + 1),
                            ratio >= 8.0, "drift ratio " + fmt("%.4g", ratio) + " >= 8"});
    }
    out.conservation.push_back(c);
  }

  json summary = base_summary(config);
  summary["decay"] = json::array();
  for (const DecayCase& c : out.decay) {
    summary["decay"].push_back({{"model", c.model},
                                {"observed_ratio", c.observed_ratio},
                                {"predicted_ratio", c.predicted_ratio},
                                {"rel_error", c.rel_error}});
  }
  summary["conservation"] = json::array();
  for (const ConservationCase& c : out.conservation) {
    summary["conservation"].push_back(
        {{"model", c.model}, {"h", c.h}, {"drift", c.drift}, {"drift_ratios", c.drift_ratios}});
  }
  finish_summary(summary, out.checks, start, out_dir, "decay_summary.json");
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------------------
// Scalar norm law: GD from (a0, b0) to a minimizer of (ab - p*)^2.

std::vector<std::pair<double, double>> norm_law_inits(const NormLawConfig& n) {
  std::vector<std::pair<double, double>> out;
  if (n.include_reference_case && n.cases > 0) out.emplace_back(1.0, 6.0);
  Rng rng(n.seed);
  const double width = n.max_factor - n.min_factor;
  if (!(width > 0.0)) throw DomainError("norm_law: need max_factor > min_factor");
  std::size_t attempts = 0;
  while (out.size() < n.cases) {
    if (++attempts > 1000000) throw DomainError("norm_law: cannot satisfy |D0| bound");
    const double a = n.min_factor + width * rng.uniform();
    const double b = n.min_factor + width * rng.uniform();
    if (std::abs(a * a - b * b) <= n.max_abs_d0) out.emplace_back(a, b);
  }
  return out;
}

NormLawResult run_norm_law(const ExperimentConfig& config, const std::string& out_dir) {
  const auto start = Clock::now();
  const NormLawConfig& n = config.norm_law;
  NormLawResult out;
  const QuadraticTask task = QuadraticTask::scalar({n.p_star});
  for (const auto& [a0, b0] : norm_law_inits(n)) {
    OptimizerSpec spec;
    spec.algorithm = Algorithm::gd;
    spec.schedule = constant_schedule(n.eta, n.max_steps);
    Optimizer opt(spec);
    ModelState state = ScalarState{a0, b0};
    NormLawCase c;
    c.a0 = a0;
    c.b0 = b0;
    c.d0 = a0 * a0 - b0 * b0;
    double loss = full_loss(state, task);
    std::int64_t k = 0;
    while (k < n.max_steps && !(loss < n.loss_tolerance)) {
      state = opt.step(state, task, k).state;
      ++k;
      loss = full_loss(state, task);
    }
    const auto& s = std::get<ScalarState>(state);
    c.steps = k;
    c.final_loss = loss;
    c.converged = loss < n.loss_tolerance;
    c.sq_norm = s.a * s.a + s.b * s.b;
    c.predicted = scalar_norm_prediction(c.d0, n.p_star).predicted_sq_norm;
    c.rel_error = std::abs(c.sq_norm - c.predicted) / c.predicted;
    out.max_rel_error = std::max(out.max_rel_error, c.rel_error);
    out.cases.push_back(c);
  }
  bool converged = true;
  for (const NormLawCase& c : out.cases) converged = converged && c.converged;
  out.checks.push_back({"norm_law_converged", converged, "every case reached the loss tolerance"});
  out.checks.push_back(below_check("norm_law_rel_error", out.max_rel_error, n.tolerance));

  json summary = base_summary(config);
  summary["max_rel_error"] = out.max_rel_error;
  if (!out_dir.empty()) {
    std::string csv = "a0,b0,d0,steps,final_loss,sq_norm,predicted,rel_error\n";
    for (const NormLawCase& c : out.cases) {
      csv += format_double(c.a0) + "," + format_double(c.b0) + "," + format_double(c.d0) + "," +
             std::to_string(c.steps) + "," + format_double(c.final_loss) + "," +
             format_double(c.sq_norm) + "," + format_double(c.predicted) + "," +
             format_double(c.rel_error) + "\n";
    }
    write_text(join_path(out_dir, "norm_law.csv"), csv);
  }
  finish_summary(summary, out.checks, start, out_dir, "norm_law_summary.json");
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------------------
// Sigma sweep.

double final_metric(const TrajectoryResult& run, const std::string& metric) {
  if (metric == "final_norm") return run.final_norm;
  if (metric == "final_loss") return run.final_loss;
  if (metric == "final_d") return run.final_d;
  throw DomainError("unknown metric " + metric);
}

namespace {

double row_metric(const TrajectoryRow& row, const std::string& metric, bool scalar) {
  if (metric == "final_norm") return row.norm_total;
  if (metric == "final_loss") return row.loss;
  if (metric == "final_d") return scalar ? row.d_entries.front() : row.d_fro;
  throw DomainError("unknown metric " + metric);
}

}  // namespace

SweepResult run_sigma_sweep(const ExperimentConfig& config, const std::string& out_dir) {
  const auto start = Clock::now();
  validate(config);
  const OptimizerSpec optimizer = effective_optimizer(config);
  const ModelShape shape = model_shape(config.model);
  const bool scalar = config.model.kind == ModelKind::scalar;

  struct Job {
    std::size_t grid_index;
    double sigma;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t g = 0; g < config.sigma_grid.size(); ++g) {
    for (std::uint64_t seed : config.seeds) jobs.push_back({g, config.sigma_grid[g], seed});
  }
  std::vector<TrajectoryResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());

  // Each job builds its own state, task and optimizer; nothing is shared.
  auto run_job = [&](std::size_t i) {
    try {
      const Job& job = jobs[i];
      RunSpec spec;
      if (scalar) {
        spec.init = ScalarState{job.sigma * config.model.a0, job.sigma * config.model.b0};
      } else {
        spec.init = init_state({job.sigma, job.seed, InitScheme::fan_in_normal, {}}, shape);
      }
      spec.task = build_task(config, Rng::derive(job.seed, 1));
      spec.optimizer = optimizer;
      spec.steps = config.steps;
      spec.record_stride = config.record_stride;
      spec.sigma_w = job.sigma;
      spec.seed = job.seed;
      results[i] = run_trajectory(spec);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max<std::size_t>(config.threads, 1),
                                                    jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Ordered merge: results are indexed by job, never by completion order.
  SweepResult out;
  json summary = base_summary(config);
  std::vector<SigmaSample> samples;
  std::vector<SigmaSeries> series;
  std::size_t sample_grid_index = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    TrajectoryResult& run = results[i];
    write_run_files(run, out_dir,
                    "run_sigma" + format_double(job.sigma) + "_seed" + std::to_string(job.seed));
    summary["per_run"].push_back(run_entry(run, job.sigma, job.seed));
    if (run.status != "ok") {
      out.excluded.push_back("sigma=" + format_double(job.sigma) +
                             ",seed=" + std::to_string(job.seed) + ": " + run.failure);
    } else {
      // One sample per grid entry, so a repeated sigma stays two samples.
      if (samples.empty() || sample_grid_index != job.grid_index) {
        samples.push_back({job.sigma, {}});
        series.push_back({job.sigma, {}});
        sample_grid_index = job.grid_index;
      }
      samples.back().values.push_back(final_metric(run, config.metric));
      // Accumulate seed sums per checkpoint; divided below.
      auto& s = series.back().series;
      if (s.empty()) s.assign(run.rows.size(), 0.0);
      for (std::size_t r = 0; r < run.rows.size(); ++r) {
        s[r] += row_metric(run.rows[r], config.metric, scalar);
      }
      if (out.sensitivity_steps.empty()) {
        for (const TrajectoryRow& row : run.rows) {
          out.sensitivity_steps.push_back(row.step);
          out.sensitivity_clocks.push_back({row.t_sgd, row.t_l2, row.t_adapt});
        }
      }
    }
    out.runs.push_back({job.sigma, job.seed, std::move(run)});
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double count = static_cast<double>(samples[i].values.size());
    for (double& x : series[i].series) x /= count;
  }

  const bool defined = samples.size() >= 2;
  out.checks.push_back({"sweep_memory_defined", defined,
                        std::to_string(samples.size()) + " sigma values with successful runs, " +
                            std::to_string(out.excluded.size()) + " runs excluded"});
  if (defined) {
    out.memory = memory_metric(samples, config.metric);
    std::vector<double> clock_axis;
    for (const ClockReport& c : out.sensitivity_clocks) {
      clock_axis.push_back(optimizer.lambda > 0.0 ? c.t_l2 : c.t_sgd);
    }
    const bool distinct = std::any_of(samples.begin(), samples.end(), [&](const SigmaSample& x) {
      return x.sigma != samples.front().sigma;
    });
    if (distinct) out.sensitivity = sensitivity_curve(series, clock_axis);
    summary["mem_spread"] = out.memory.spread;
    summary["memory"] = {{"metric", out.memory.metric},
                         {"sigma_values", out.memory.sigma_values},
                         {"means", out.memory.means}};
  }
  summary["excluded"] = out.excluded;

  if (!out_dir.empty() && !out.sensitivity.abs_beta.empty()) {
    std::string csv = "step,abs_beta,t_sgd,t_l2,t_adapt\n";
    for (std::size_t r = 0; r < out.sensitivity_steps.size(); ++r) {
      const ClockReport& c = out.sensitivity_clocks[r];
      csv += std::to_string(out.sensitivity_steps[r]) + "," +
             format_double(out.sensitivity.abs_beta[r]) + "," + format_double(c.t_sgd) + "," +
             format_double(c.t_l2) + "," + format_double(c.t_adapt) + "\n";
    }
    write_text(join_path(out_dir, "sensitivity.csv"), csv);
  }
  if (!out_dir.empty() && defined) {
    std::string mem = "sigma_w,mean\n";
    for (std::size_t i = 0; i < out.memory.sigma_values.size(); ++i) {
      mem += format_double(out.memory.sigma_values[i]) + "," +
             format_double(out.memory.means[i]) + "\n";
    }
    write_text(join_path(out_dir, "memory.csv"), mem);
  }
  finish_summary(summary, out.checks, start, out_dir, "sweep_summary.json");
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------------------
// Minibatch leakage clock at a frozen state.

namespace {

// ||mean over draws of Delta D_B - Delta D_full||_F. A Euclidean step changes
// D only at second order, so each Delta D_B is exactly eta^2 Br(G_B) and the
// Monte-Carlo noise is that of the quadratic term alone.
double minibatch_component(const ModelState& state, const QuadraticTask& task,
                           std::size_t batch, Sampling sampling, std::size_t draws,
                           double eta, std::uint64_t sampler_seed,
                           const std::vector<Matrix>& full_change) {
  const QuadraticTask sampled = task.resampled(sampling, batch, sampler_seed);
  OptimizerSpec spec;
  spec.algorithm = Algorithm::sgd;
  spec.schedule = constant_schedule(eta, static_cast<std::int64_t>(draws));
  std::vector<Matrix> sum;
  for (const Matrix& m : full_change) sum.emplace_back(m.rows(), m.cols());
  for (std::size_t t = 0; t < draws; ++t) {
    const StepResult r = step_gd(state, sampled, spec, static_cast<std::int64_t>(t));
    const std::vector<Matrix> change = imbalance_change(state, r.state);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += change[j];
  }
  const double inv = 1.0 / static_cast<double>(draws);
  std::vector<Matrix> diff;
  for (std::size_t j = 0; j < sum.size(); ++j) diff.push_back(inv * sum[j] - full_change[j]);
  return frobenius_total(diff);
}

}  // namespace

MinibatchResult run_minibatch_clock(const ExperimentConfig& config,
                                    const std::string& out_dir) {
  const auto start = Clock::now();
  const MinibatchConfig& m = config.minibatch;
  if (m.draws < 2) throw DomainError("run_minibatch_clock: need >= 2 draws per batch size");
  if (m.batch_sizes.size() < 2) throw DomainError("run_minibatch_clock: need >= 2 batch sizes");
  if (config.model.kind == ModelKind::scalar) {
    throw DomainError("run_minibatch_clock: needs a two-factor or deep-linear model");
  }
  if (m.samples < 32) throw DomainError("run_minibatch_clock: needs >= 32 samples");
  ExperimentConfig task_config = config;
  task_config.task.samples = m.samples;
  const QuadraticTask task =
      build_task(task_config, 0).resampled(Sampling::full_batch, 0, 0);
  const ModelState state = init_state({m.sigma_w, m.state_seed, InitScheme::fan_in_normal, {}},
                                      model_shape(config.model));

  auto full_change = [&](double eta) {
    OptimizerSpec spec;
    spec.algorithm = Algorithm::gd;
    spec.schedule = constant_schedule(eta, 1);
    return imbalance_change(state, step_gd(state, task, spec, 0).state);
  };
  const std::vector<Matrix> full_1 = full_change(m.eta);
  const std::vector<Matrix> full_2 = full_change(2.0 * m.eta);

  // Exact oracle: per-sample gradients G_i and their mean.
  const std::size_t n = task.sample_count();
  std::vector<Matrix> g_i;
  for (std::size_t i = 0; i < n; ++i) {
    g_i.push_back(loss_and_product_grad(state, task, {i}).product_grad);
  }
  Matrix g_bar = loss_and_product_grad(state, task, task.full_batch()).product_grad;
  std::vector<Matrix> cov;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<Matrix> br = second_order_bracket(state, g_i[i] - g_bar);
    if (cov.empty()) {
      for (const Matrix& b : br) cov.emplace_back(b.rows(), b.cols());
    }
    for (std::size_t j = 0; j < br.size(); ++j) cov[j] += br[j];
  }
  const double cov_norm = frobenius_total(cov) / static_cast<double>(n);

  MinibatchResult out;
  std::vector<double> inv_b, est;
  for (std::size_t b : m.batch_sizes) {
    if (b == 0 || b > n) throw DomainError("run_minibatch_clock: batch size out of range");
    MinibatchPoint p;
    p.batch = b;
    p.estimate = minibatch_component(state, task, b, Sampling::seeded_uniform, m.draws, m.eta,
                                     Rng::derive(m.state_seed, 100 + b), full_1);
    p.estimate_doubled_eta =
        minibatch_component(state, task, b, Sampling::seeded_uniform, m.draws, 2.0 * m.eta,
                            Rng::derive(m.state_seed, 200 + b), full_2);
    p.exact = m.eta * m.eta / static_cast<double>(b) * cov_norm;
    inv_b.push_back(1.0 / static_cast<double>(b));
    est.push_back(p.estimate);
    out.points.push_back(p);
  }
  out.full_batch_component = minibatch_component(state, task, n, Sampling::full_batch, 16,
                                                 m.eta, 0, full_1);
  out.fit = ols_fit(inv_b, est);
  const MinibatchPoint& ref = out.points.front();
  double max_exact_dev = 0.0;
  for (const MinibatchPoint& p : out.points) {
    const double scaled = static_cast<double>(p.batch) * p.estimate /
                          (static_cast<double>(ref.batch) * ref.estimate);
    out.max_inverse_b_deviation = std::max(out.max_inverse_b_deviation, std::abs(scaled - 1.0));
    out.max_eta_deviation = std::max(
        out.max_eta_deviation, std::abs(p.estimate_doubled_eta / (4.0 * p.estimate) - 1.0));
    max_exact_dev = std::max(max_exact_dev, std::abs(p.estimate / p.exact - 1.0));
  }
  out.checks.push_back(below_check("minibatch_inverse_b_scaling", out.max_inverse_b_deviation, 0.25));
  out.checks.push_back(below_check("minibatch_eta_squared_scaling", out.max_eta_deviation, 0.25));
  out.checks.push_back(below_check("minibatch_matches_exact", max_exact_dev, 0.25));
  out.checks.push_back(below_check("minibatch_full_batch_zero", out.full_batch_component, 1e-300));

  json summary = base_summary(config);
  summary["slope_vs_inverse_b"] = out.fit.slope;
  summary["intercept"] = out.fit.intercept;
  summary["exact_slope"] = m.eta * m.eta * cov_norm;
  summary["full_batch_component"] = out.full_batch_component;
  summary["max_inverse_b_deviation"] = out.max_inverse_b_deviation;
  summary["max_eta_deviation"] = out.max_eta_deviation;
  if (!out_dir.empty()) {
    std::string csv = "batch,estimate,exact,estimate_doubled_eta\n";
    for (const MinibatchPoint& p : out.points) {
      csv += std::to_string(p.batch) + "," + format_double(p.estimate) + "," +
             format_double(p.exact) + "," + format_double(p.estimate_doubled_eta) + "\n";
    }
    write_text(join_path(out_dir, "minibatch_clock.csv"), csv);
  }
  finish_summary(summary, out.checks, start, out_dir, "minibatch_summary.json");
  out.summary = std::move(summary);
  return out;
}

json run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                    std::vector<Check>* checks) {
  auto take = [&](auto result) {
    if (checks) checks->insert(checks->end(), result.checks.begin(), result.checks.end());
    return result.summary;
  };
  switch (config.kind) {
    case ExperimentKind::figure7: return take(run_figure7(config, out_dir));
    case ExperimentKind::clock_table: return take(run_clock_table(config, out_dir));
    case ExperimentKind::leakage_order: return take(run_leakage_order(config, out_dir));
    case ExperimentKind::decay_check: return take(run_decay_check(config, out_dir));
    case ExperimentKind::norm_law: return take(run_norm_law(config, out_dir));
    case ExperimentKind::sigma_sweep: return take(run_sigma_sweep(config, out_dir));
    case ExperimentKind::minibatch_clock: return take(run_minibatch_clock(config, out_dir));
  }
  throw DomainError("run_experiment: unknown kind");
}

}  // namespace memclock::harness
