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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "timely/csma_tuner.hpp"
#include "timely/dual_solver.hpp"
#include "timely/learner.hpp"
#include "timely/network.hpp"

namespace timely::harness {

enum class PolicyKind { kOptimal, kQcsma, kLearned };

std::string_view policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& name, const std::string& field);

/// Network JSON layout:
///   {"nodes": ["a", "b", ...],
///    "links": [{"src": "a", "dst": "b", "reliability": 0.9, "rate": 1}, ...],
///    "interference": "node-sharing" | "none" | [[0, 1], ...]}
/// Nodes in links and flows may be given by name or by index.
NetworkSpec parse_network(const nlohmann::json& j, const std::string& field = "network");
NetworkSpec load_network_file(const std::filesystem::path& path);

struct ExperimentConfig {
  nlohmann::json raw;
  /// Directory relative paths are resolved against.
  std::filesystem::path base_dir;
  /// Network file path as written, or "inline".
  std::string network_source;
  NetworkSpec network;
  std::vector<FlowSpec> flows;
  std::vector<int> deadlines{10};
  std::vector<int> scales{1};
  std::int64_t horizon = 50000;
  std::vector<std::uint64_t> seeds{1};
  std::vector<PolicyKind> policies{PolicyKind::kOptimal};
  /// Fixed bandwidth caps for solve-relaxed.
  std::optional<std::vector<double>> caps;
  /// Fixed CSMA aggressions; unset means tune them per deadline.
  std::optional<std::vector<double>> aggression;
  DualSchedule dual;
  TunerSchedule tuner;
  int tuner_starts = 1;
  LearnerConfig learner;
  int qcsma_window = 10;
  bool qcsma_carryover = true;
  bool enforce_capacity = true;
  std::filesystem::path output_dir = "out";
};

/// Parses and validates an experiment. Every error is a ConfigError whose
/// field() names the offending key, e.g. "flows[1].source".
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses "1,2,7" and ranges "1-5" (inclusive).
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::vector<std::uint64_t>> seeds;
  int threads = 1;
  bool verbose_trace = false;
  /// Timestamp written into sidecars; defaults to the current UTC time.
  std::optional<std::string> timestamp;
};

/// A CSV held in memory so its body can be hashed before writing.
class Table {
 public:
  explicit Table(std::vector<std::string> header);

  Table& row();
  Table& add(std::string_view cell);
  Table& add(const char* cell) { return add(std::string_view(cell)); }
  Table& add(double value);
  Table& add(std::int64_t value);
  Table& add(int value) { return add(static_cast<std::int64_t>(value)); }
  Table& add(std::uint64_t value);
  Table& add(bool value) { return add(static_cast<std::int64_t>(value ? 1 : 0)); }

  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trip decimal form.
std::string format_double(double value);

/// SHA-1 of "blob <size>\0" + body, as git computes object ids.
std::string git_blob_sha1(std::string_view body);

struct CommandResult {
  std::vector<std::filesystem::path> files;
};

/// Runs fn(0..count-1) on up to `threads` workers. Rethrows the first
/// exception after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

CommandResult cmd_solve_relaxed(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_tune_csma(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_simulate(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_sweep_scale(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_sweep_deadline(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_learn_online(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_baseline(const ExperimentConfig& config, const RunOptions& options);

using Command = CommandResult (*)(const ExperimentConfig&, const RunOptions&);

struct CommandInfo {
  std::string_view name;
  std::string_view description;
  Command run;
};

std::span<const CommandInfo> commands();

}  // namespace timely::harness
