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

#include "memclock/harness/config.h"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "memclock/error.h"

namespace memclock {

NLOHMANN_JSON_SERIALIZE_ENUM(ModelKind, {
                                            {ModelKind::scalar, "scalar"},
                                            {ModelKind::two_factor, "two_factor"},
                                            {ModelKind::deep_linear, "deep_linear"},
                                        })

NLOHMANN_JSON_SERIALIZE_ENUM(Sampling, {
                                           {Sampling::full_batch, "full_batch"},
                                           {Sampling::cyclic, "cyclic"},
                                           {Sampling::seeded_uniform, "seeded_uniform"},
                                       })

NLOHMANN_JSON_SERIALIZE_ENUM(ScheduleKind, {
                                               {ScheduleKind::constant, "constant"},
                                               {ScheduleKind::cosine, "cosine"},
                                           })

NLOHMANN_JSON_SERIALIZE_ENUM(Algorithm, {
                                            {Algorithm::gd, "gd"},
                                            {Algorithm::sgd, "sgd"},
                                            {Algorithm::momentum_sgd, "momentum_sgd"},
                                            {Algorithm::gd_weight_decay, "gd_weight_decay"},
                                            {Algorithm::precond_gd, "precond_gd"},
                                            {Algorithm::adam, "adam"},
                                        })

namespace harness {

NLOHMANN_JSON_SERIALIZE_ENUM(ExperimentKind,
                             {
                                 {ExperimentKind::figure7, "figure7"},
                                 {ExperimentKind::clock_table, "clock_table"},
                                 {ExperimentKind::leakage_order, "leakage_order"},
                                 {ExperimentKind::decay_check, "decay_check"},
                                 {ExperimentKind::norm_law, "norm_law"},
                                 {ExperimentKind::sigma_sweep, "sigma_sweep"},
                                 {ExperimentKind::minibatch_clock, "minibatch_clock"},
                             })

namespace {

using nlohmann::json;

// The serialize-enum macro maps unknown strings to the first enumerator; a
// typo in a config should fail loudly instead.
template <typename Enum>
Enum strict_enum(const json& j, const std::string& where) {
  if (!j.is_string()) throw DomainError("config: " + where + " must be a string");
  const Enum e = j.get<Enum>();
  if (json(e) != j) {
    throw DomainError("config: unknown value \"" + j.get<std::string>() + "\" for " + where);
  }
  return e;
}

// Reads an object field by field and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw DomainError("config: " + where_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_enum_v<T>) {
        out = strict_enum<T>(*it, path(key));
      } else {
        out = it->template get<T>();
      }
    } catch (const json::exception& e) {
      throw DomainError("config: bad value for " + path(key) + ": " + e.what());
    }
  }

  template <typename T, typename Fn>
  void nested(const char* key, T& out, Fn&& parse) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    out = parse(*it, path(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw DomainError("config: unknown key " + path(it.key()));
    }
  }

  std::string path(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json schedule_json(const Schedule& s) {
  return {{"kind", s.kind},
          {"eta0", s.eta0},
          {"floor_alpha", s.floor_alpha},
          {"total_steps", s.total_steps}};
}

Schedule parse_schedule(const json& j, const std::string& where) {
  Schedule s;
  s.total_steps = 0;  // omitted horizon follows the experiment's step count
  Reader r(j, where);
  r.get("kind", s.kind);
  r.get("eta0", s.eta0);
  r.get("floor_alpha", s.floor_alpha);
  r.get("total_steps", s.total_steps);
  r.finish();
  return s;
}

json optimizer_json(const OptimizerSpec& o) {
  return {{"algorithm", o.algorithm},     {"schedule", schedule_json(o.schedule)},
          {"lambda", o.lambda},           {"momentum", o.momentum},
          {"beta1", o.beta1},             {"beta2", o.beta2},
          {"epsilon", o.epsilon},         {"preconditioner", o.preconditioner}};
}

OptimizerSpec parse_optimizer(const json& j, const std::string& where) {
  OptimizerSpec o = ExperimentConfig::default_sweep_optimizer();
  Reader r(j, where);
  r.get("algorithm", o.algorithm);
  r.nested("schedule", o.schedule, parse_schedule);
  r.get("lambda", o.lambda);
  r.get("momentum", o.momentum);
  r.get("beta1", o.beta1);
  r.get("beta2", o.beta2);
  r.get("epsilon", o.epsilon);
  r.get("preconditioner", o.preconditioner);
  r.finish();
  return o;
}

json model_json(const ModelConfig& m) {
  return {{"kind", m.kind}, {"dims", m.dims}, {"a0", m.a0}, {"b0", m.b0}};
}

ModelConfig parse_model(const json& j, const std::string& where) {
  ModelConfig m;
  Reader r(j, where);
  r.get("kind", m.kind);
  r.get("dims", m.dims);
  r.get("a0", m.a0);
  r.get("b0", m.b0);
  r.finish();
  return m;
}

json task_json(const TaskConfig& t) {
  return {{"samples", t.samples},       {"data_seed", t.data_seed},
          {"noise", t.noise},           {"sampling", t.sampling},
          {"batch_size", t.batch_size}, {"scalar_targets", t.scalar_targets}};
}

TaskConfig parse_task(const json& j, const std::string& where) {
  TaskConfig t;
  Reader r(j, where);
  r.get("samples", t.samples);
  r.get("data_seed", t.data_seed);
  r.get("noise", t.noise);
  r.get("sampling", t.sampling);
  r.get("batch_size", t.batch_size);
  r.get("scalar_targets", t.scalar_targets);
  r.finish();
  return t;
}

json figure7_json(const Figure7Config& f) {
  return {{"etas", f.etas},
          {"gd_steps", f.gd_steps},
          {"sgd_steps", f.sgd_steps},
          {"adam_steps", f.adam_steps},
          {"minibatch_adam_steps", f.minibatch_adam_steps},
          {"a0", f.a0},
          {"b0", f.b0},
          {"targets", f.targets},
          {"full_batch_target", f.full_batch_target},
          {"adam_sampling", f.adam_sampling},
          {"threshold", f.threshold}};
}

Figure7Config parse_figure7(const json& j, const std::string& where) {
  Figure7Config f;
  Reader r(j, where);
  r.get("etas", f.etas);
  r.get("gd_steps", f.gd_steps);
  r.get("sgd_steps", f.sgd_steps);
  r.get("adam_steps", f.adam_steps);
  r.get("minibatch_adam_steps", f.minibatch_adam_steps);
  r.get("a0", f.a0);
  r.get("b0", f.b0);
  r.get("targets", f.targets);
  r.get("full_batch_target", f.full_batch_target);
  r.get("adam_sampling", f.adam_sampling);
  r.get("threshold", f.threshold);
  r.finish();
  return f;
}

json clock_case_json(const ClockCase& c) {
  return {{"label", c.label},   {"epochs", c.epochs}, {"batch", c.batch},
          {"eta", c.eta},       {"lambda", c.lambda}, {"clock", c.clock},
          {"quoted", c.quoted}};
}

ClockCase parse_clock_case(const json& j, const std::string& where) {
  ClockCase c;
  Reader r(j, where);
  r.get("label", c.label);
  r.get("epochs", c.epochs);
  r.get("batch", c.batch);
  r.get("eta", c.eta);
  r.get("lambda", c.lambda);
  r.get("clock", c.clock);
  r.get("quoted", c.quoted);
  r.finish();
  return c;
}

json clock_table_json(const ClockTableConfig& c) {
  json cases = json::array();
  for (const ClockCase& cc : c.cases) cases.push_back(clock_case_json(cc));
  return {{"n_train", c.n_train}, {"tolerance", c.tolerance}, {"cases", cases}};
}

ClockTableConfig parse_clock_table(const json& j, const std::string& where) {
  ClockTableConfig c;
  Reader r(j, where);
  r.get("n_train", c.n_train);
  r.get("tolerance", c.tolerance);
  r.nested("cases", c.cases, [](const json& arr, const std::string& w) {
    if (!arr.is_array()) throw DomainError("config: " + w + " must be an array");
    std::vector<ClockCase> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(parse_clock_case(arr[i], w + "[" + std::to_string(i) + "]"));
    }
    return out;
  });
  r.finish();
  return c;
}

json leakage_json(const LeakageConfig& l) {
  return {{"eta_min", l.eta_min},
          {"eta_max", l.eta_max},
          {"points", l.points},
          {"preconditioner", l.preconditioner},
          {"sigma_w", l.sigma_w},
          {"state_seed", l.state_seed}};
}

LeakageConfig parse_leakage(const json& j, const std::string& where) {
  LeakageConfig l;
  Reader r(j, where);
  r.get("eta_min", l.eta_min);
  r.get("eta_max", l.eta_max);
  r.get("points", l.points);
  r.get("preconditioner", l.preconditioner);
  r.get("sigma_w", l.sigma_w);
  r.get("state_seed", l.state_seed);
  r.finish();
  return l;
}

json minibatch_json(const MinibatchConfig& m) {
  return {{"batch_sizes", m.batch_sizes}, {"draws", m.draws},
          {"eta", m.eta},                 {"samples", m.samples},
          {"sigma_w", m.sigma_w},         {"state_seed", m.state_seed}};
}

MinibatchConfig parse_minibatch(const json& j, const std::string& where) {
  MinibatchConfig m;
  Reader r(j, where);
  r.get("batch_sizes", m.batch_sizes);
  r.get("draws", m.draws);
  r.get("eta", m.eta);
  r.get("samples", m.samples);
  r.get("sigma_w", m.sigma_w);
  r.get("state_seed", m.state_seed);
  r.finish();
  return m;
}

json norm_law_json(const NormLawConfig& n) {
  return {{"cases", n.cases},
          {"eta", n.eta},
          {"max_abs_d0", n.max_abs_d0},
          {"min_factor", n.min_factor},
          {"max_factor", n.max_factor},
          {"loss_tolerance", n.loss_tolerance},
          {"max_steps", n.max_steps},
          {"seed", n.seed},
          {"p_star", n.p_star},
          {"include_reference_case", n.include_reference_case},
          {"tolerance", n.tolerance}};
}

NormLawConfig parse_norm_law(const json& j, const std::string& where) {
  NormLawConfig n;
  Reader r(j, where);
  r.get("cases", n.cases);
  r.get("eta", n.eta);
  r.get("max_abs_d0", n.max_abs_d0);
  r.get("min_factor", n.min_factor);
  r.get("max_factor", n.max_factor);
  r.get("loss_tolerance", n.loss_tolerance);
  r.get("max_steps", n.max_steps);
  r.get("seed", n.seed);
  r.get("p_star", n.p_star);
  r.get("include_reference_case", n.include_reference_case);
  r.get("tolerance", n.tolerance);
  r.finish();
  return n;
}

json decay_json(const DecayConfig& d) {
  return {{"lambda", d.lambda},
          {"t_end", d.t_end},
          {"h", d.h},
          {"conservation_h", d.conservation_h},
          {"state_seed", d.state_seed}};
}

DecayConfig parse_decay(const json& j, const std::string& where) {
  DecayConfig d;
  Reader r(j, where);
  r.get("lambda", d.lambda);
  r.get("t_end", d.t_end);
  r.get("h", d.h);
  r.get("conservation_h", d.conservation_h);
  r.get("state_seed", d.state_seed);
  r.finish();
  return d;
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::figure7: return "figure7";
    case ExperimentKind::clock_table: return "clock_table";
    case ExperimentKind::leakage_order: return "leakage_order";
    case ExperimentKind::decay_check: return "decay_check";
    case ExperimentKind::norm_law: return "norm_law";
    case ExperimentKind::sigma_sweep: return "sigma_sweep";
    case ExperimentKind::minibatch_clock: return "minibatch_clock";
  }
  return "?";
}

OptimizerSpec ExperimentConfig::default_sweep_optimizer() {
  OptimizerSpec o;
  o.algorithm = Algorithm::gd;
  o.schedule = Schedule{ScheduleKind::constant, 1e-2, 0.0, 0};
  return o;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  return c;
}

OptimizerSpec effective_optimizer(const ExperimentConfig& config) {
  OptimizerSpec o = config.optimizer;
  if (o.schedule.total_steps == 0) o.schedule.total_steps = config.steps;
  return o;
}

void validate(const ExperimentConfig& c) {
  if (c.steps < 1) throw DomainError("config: steps must be >= 1");
  if (c.record_stride < 0) throw DomainError("config: record_stride must be >= 0");
  if (c.threads < 1) throw DomainError("config: threads must be >= 1");
  if (c.metric != "final_norm" && c.metric != "final_loss" && c.metric != "final_d") {
    throw DomainError("config: metric must be final_norm, final_loss or final_d");
  }
  for (double s : c.sigma_grid) {
    if (!(s > 0.0)) throw DomainError("config: sigma_grid entries must be positive");
  }
  validate(effective_optimizer(c));
  if (c.kind == ExperimentKind::sigma_sweep) {
    if (c.sigma_grid.size() < 2) throw DomainError("config: sweep needs >= 2 sigma values");
    if (c.seeds.empty()) throw DomainError("config: sweep needs >= 1 seed");
  }
  if (c.kind == ExperimentKind::minibatch_clock && c.minibatch.draws < 2) {
    throw DomainError("config: minibatch study needs >= 2 draws per batch size");
  }
  if (c.kind == ExperimentKind::leakage_order && c.leakage.points < 4) {
    throw DomainError("config: leakage study needs >= 4 step sizes");
  }
  for (const ClockCase& cc : c.clock_table.cases) {
    if (cc.clock != "t_sgd" && cc.clock != "t_l2" && cc.clock != "t_adapt") {
      throw DomainError("config: clock case " + cc.label + " has unknown clock " + cc.clock);
    }
    if (cc.batch < 1) throw DomainError("config: clock case " + cc.label + " needs batch >= 1");
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"kind", c.kind},
          {"model", model_json(c.model)},
          {"task", task_json(c.task)},
          {"optimizer", optimizer_json(c.optimizer)},
          {"sigma_grid", c.sigma_grid},
          {"seeds", c.seeds},
          {"steps", c.steps},
          {"output_dir", c.output_dir},
          {"record_stride", c.record_stride},
          {"threads", c.threads},
          {"metric", c.metric},
          {"figure7", figure7_json(c.figure7)},
          {"clock_table", clock_table_json(c.clock_table)},
          {"leakage", leakage_json(c.leakage)},
          {"minibatch", minibatch_json(c.minibatch)},
          {"norm_law", norm_law_json(c.norm_law)},
          {"decay", decay_json(c.decay)}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  r.get("kind", c.kind);
  r.nested("model", c.model, parse_model);
  r.nested("task", c.task, parse_task);
  r.nested("optimizer", c.optimizer, parse_optimizer);
  r.get("sigma_grid", c.sigma_grid);
  r.get("seeds", c.seeds);
  r.get("steps", c.steps);
  r.get("output_dir", c.output_dir);
  r.get("record_stride", c.record_stride);
  r.get("threads", c.threads);
  r.get("metric", c.metric);
  r.nested("figure7", c.figure7, parse_figure7);
  r.nested("clock_table", c.clock_table, parse_clock_table);
  r.nested("leakage", c.leakage, parse_leakage);
  r.nested("minibatch", c.minibatch, parse_minibatch);
  r.nested("norm_law", c.norm_law, parse_norm_law);
  r.nested("decay", c.decay, parse_decay);
  r.finish();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config", path);
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config", path);
  return parse_config(text.str());
}

std::string dump_config(const ExperimentConfig& config) {
  return to_json(config).dump(2) + "\n";
}

ModelShape model_shape(const ModelConfig& model) {
  ModelShape shape;
  shape.kind = model.kind;
  shape.dims = model.dims;
  if (model.kind == ModelKind::scalar) shape.dims = {1, 1, 1};
  return shape;
}

QuadraticTask build_task(const ExperimentConfig& config, std::uint64_t sampler_seed) {
  const TaskConfig& t = config.task;
  if (config.model.kind == ModelKind::scalar) {
    return QuadraticTask::scalar(t.scalar_targets, t.sampling, t.batch_size, sampler_seed);
  }
  const auto& dims = config.model.dims;
  if (dims.size() < 2) throw DomainError("config: model dims need at least two entries");
  return planted_regression_task(dims.front(), dims.back(), t.samples, t.data_seed, t.noise,
                                 t.sampling, t.batch_size, sampler_seed);
}

}  // namespace harness
}  // namespace memclock
