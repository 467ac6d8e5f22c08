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

#ifndef MEMCLOCK_HARNESS_OUTPUT_H_
#define MEMCLOCK_HARNESS_OUTPUT_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "memclock/harness/trajectory.h"

namespace memclock::harness {

inline constexpr std::string_view kTrajectoryHeader =
    "step,eta,loss,d_fro,t_sgd,t_l2,t_adapt,norm_total,sigma_w,seed,status";

// Shortest text that parses back to the same double.
std::string format_double(double x);

// Trajectory CSV with the fixed header above. Parsing restores every column
// of the schema; d_entries and factor_norms live in the detail CSV.
std::string trajectory_csv(std::span<const TrajectoryRow> rows);
std::vector<TrajectoryRow> parse_trajectory_csv(const std::string& text);

// step, factor_norm_1..m, d_1..p: the per-pair imbalance entries and factor
// norms, one line per kept row.
std::string detail_csv(std::span<const TrajectoryRow> rows);

void emit_csv(std::span<const TrajectoryRow> rows, const std::string& path);
std::vector<TrajectoryRow> read_csv(const std::string& path);

void emit_summary(const nlohmann::json& summary, const std::string& path);

// Writes text, creating parent directories. IoError carries the path.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

std::string join_path(const std::string& dir, const std::string& name);

// Build-time `git describe`, or "unknown".
std::string git_describe();

nlohmann::json run_entry(const TrajectoryResult& run, double sigma_w, std::uint64_t seed);

}  // namespace memclock::harness

#endif  // MEMCLOCK_HARNESS_OUTPUT_H_
