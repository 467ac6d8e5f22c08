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

#include "memclock/harness/output.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "memclock/error.h"

#ifndef MEMCLOCK_GIT_DESCRIBE
#define MEMCLOCK_GIT_DESCRIBE "unknown"
#endif

namespace memclock::harness {
namespace {

constexpr std::size_t kColumns = 11;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DomainError("csv line " + std::to_string(line_no) + ": cannot parse \"" +
                      std::string(field) + "\"");
  }
  return value;
}

template <typename T>
std::string format_integer(T x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw NumericError("format_double: buffer too small", 0);
  return std::string(buf, ptr);
}

std::string trajectory_csv(std::span<const TrajectoryRow> rows) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const TrajectoryRow& r : rows) {
    out += format_integer(r.step);
    for (double x : {r.eta, r.loss, r.d_fro, r.t_sgd, r.t_l2, r.t_adapt, r.norm_total,
                     r.sigma_w}) {
      out += ',';
      out += format_double(x);
    }
    out += ',';
    out += format_integer(r.seed);
    out += ',';
    out += r.status;
    out += '\n';
  }
  return out;
}

std::vector<TrajectoryRow> parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw DomainError("csv: missing or unexpected header");
  }
  std::vector<TrajectoryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != kColumns) {
      throw DomainError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(kColumns) + " fields, got " + std::to_string(f.size()));
    }
    TrajectoryRow r;
    r.step = parse_number<std::int64_t>(f[0], line_no);
    r.eta = parse_number<double>(f[1], line_no);
    r.loss = parse_number<double>(f[2], line_no);
    r.d_fro = parse_number<double>(f[3], line_no);
    r.t_sgd = parse_number<double>(f[4], line_no);
    r.t_l2 = parse_number<double>(f[5], line_no);
    r.t_adapt = parse_number<double>(f[6], line_no);
    r.norm_total = parse_number<double>(f[7], line_no);
    r.sigma_w = parse_number<double>(f[8], line_no);
    r.seed = parse_number<std::uint64_t>(f[9], line_no);
    r.status = std::string(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string detail_csv(std::span<const TrajectoryRow> rows) {
  std::string out = "step";
  if (!rows.empty()) {
    for (std::size_t j = 0; j < rows.front().factor_norms.size(); ++j) {
      out += ",factor_norm_" + std::to_string(j + 1);
    }
    for (std::size_t i = 0; i < rows.front().d_entries.size(); ++i) {
      out += ",d_" + std::to_string(i + 1);
    }
  }
  out += '\n';
  for (const TrajectoryRow& r : rows) {
    out += format_integer(r.step);
    for (double x : r.factor_norms) out += ',' + format_double(x);
    for (double x : r.d_entries) out += ',' + format_double(x);
    out += '\n';
  }
  return out;
}

void emit_csv(std::span<const TrajectoryRow> rows, const std::string& path) {
  write_text(path, trajectory_csv(rows));
}

std::vector<TrajectoryRow> read_csv(const std::string& path) {
  return parse_trajectory_csv(read_text(path));
}

void emit_summary(const nlohmann::json& summary, const std::string& path) {
  write_text(path, summary.dump(2) + "\n");
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory: " + ec.message(), p.parent_path().string());
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path);
  out << text;
  out.close();
  if (!out) throw IoError("write failed", path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return (std::filesystem::path(dir) / name).string();
}

std::string git_describe() { return MEMCLOCK_GIT_DESCRIBE; }

nlohmann::json run_entry(const TrajectoryResult& run, double sigma_w, std::uint64_t seed) {
  auto finite_or_null = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::json j = {{"sigma_w", sigma_w},
                      {"seed", seed},
                      {"final_loss", finite_or_null(run.final_loss)},
                      {"final_d", finite_or_null(run.final_d)},
                      {"final_norm", finite_or_null(run.final_norm)},
                      {"status", run.status},
                      {"steps_run", run.steps_run}};
  if (!run.failure.empty()) j["failure"] = run.failure;
  return j;
}

}  // namespace memclock::harness
