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

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "timely/csma.hpp"
#include "timely/network.hpp"
#include "timely/packet_dp.hpp"
#include "timely/sim.hpp"

namespace timely {

/// Polynomial step sizes x0 * t^-exponent on three separated timescales.
struct StepSchedule {
  double alpha0 = 1.0, alpha_exp = 0.6;  ///< Q-learning
  double beta0 = 1.0, beta_exp = 0.75;   ///< prices
  double gamma0 = 1.0, gamma_exp = 0.9;  ///< aggression

  double alpha(std::int64_t t) const { return alpha0 * std::pow(static_cast<double>(t), -alpha_exp); }
  double beta(std::int64_t t) const { return beta0 * std::pow(static_cast<double>(t), -beta_exp); }
  double gamma(std::int64_t t) const { return gamma0 * std::pow(static_cast<double>(t), -gamma_exp); }
};

struct StepSizes {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct LearnerConfig {
  StepSchedule steps;
  /// Q-learning step counts visits of each (node, age, link) entry rather
  /// than slots, so rarely tried actions keep learning.
  bool per_entry_alpha = true;
  /// Age cap B; 0 means the deadline.
  int age_cap = 0;
  /// Exploration eps_t = max(epsilon_floor, 1/t).
  double epsilon_floor = 0.05;
  /// Weight of the newest access sample in the smoothed access estimate.
  double access_smoothing = 0.01;
  std::optional<double> mu_max;
  double r_min = 1e-3;
  double r_max = 1e3;
  std::optional<std::vector<double>> initial_prices;
  std::optional<std::vector<double>> initial_aggression;
  bool learn_prices = true;
  bool learn_aggression = true;
  int subchannels = 1;
  std::int64_t horizon = 100000;
  std::int64_t eval_horizon = 100000;
  std::uint64_t seed = 1;
  std::int64_t trace_every = 1000;
};

/// Tabular Q^f(i, a, j) plus prices, aggressions and the access estimate.
struct LearnerState {
  std::size_t num_nodes = 0;
  std::size_t num_links = 0;
  int age_cap = 1;
  double mu_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  /// q[f][(node * (age_cap + 1) + age) * num_links + link]; only links
  /// leaving `node` are meaningful.
  std::vector<std::vector<double>> q;
  std::vector<std::vector<std::int64_t>> visits;
  std::vector<double> mu;
  std::vector<double> r;
  std::vector<double> access_estimate;
  std::int64_t t = 0;

  LearnerState() = default;
  LearnerState(const NetworkSpec& net, std::span<const FlowSpec> flows, int deadline,
               const LearnerConfig& config);

  std::size_t cell(NodeId node, int age, LinkId link) const noexcept {
    return (static_cast<std::size_t>(node) * static_cast<std::size_t>(age_cap + 1) +
            static_cast<std::size_t>(age)) * num_links + static_cast<std::size_t>(link);
  }
  double& at(int flow, NodeId node, int age, LinkId link);
  double at(int flow, NodeId node, int age, LinkId link) const;

  /// max(0, best transmit value at any age a' in [a, B)), i.e. the value of
  /// holding the packet and acting optimally later. Zero at a >= B.
  double value(const NetworkSpec& net, int flow, NodeId node, int age) const;

  /// Greedy action: the best link if it beats idling strictly, else idle.
  LinkId greedy(const NetworkSpec& net, int flow, NodeId node, int age) const;
};

/// One attempted transmission seen by the learner.
struct LearnerTransition {
  int flow = 0;
  NodeId node = 0;
  int age = 0;
  LinkId link = kIdle;
  bool success = false;
  NodeId landed = 0;
};

/// Q, price and aggression updates for one slot. `usage` is the bandwidth
/// each link used, `access` the bandwidth CSMA granted it (both per unit scale).
/// With per_entry_alpha set, steps.alpha is ignored and each entry uses
/// config.steps.alpha(visits of that entry).
void learner_step(LearnerState& state, const NetworkSpec& net, std::span<const FlowSpec> flows,
                  std::span<const LearnerTransition> transitions, std::span<const double> usage,
                  std::span<const double> access, const StepSizes& steps,
                  const LearnerConfig& config);

struct LearnerTraceRow {
  std::int64_t t = 0;
  std::vector<double> q_norm;  ///< per flow, max |Q|
  std::vector<double> mu;
  std::vector<double> r;
  double running_throughput = 0.0;  ///< weighted deliveries per slot so far
};

struct LearningResult {
  LearnerState state;
  std::vector<PacketPolicy> greedy_policy;
  /// Empirical mix of the greedy action per state over the last 10% of the
  /// learning horizon.
  std::vector<MixedPacketPolicy> tail_policy;
  bool converged = true;  ///< false: greedy policy changed during the last 10% of the horizon
  std::int64_t policy_changes_in_tail = 0;
  std::vector<LearnerTraceRow> trace;
  SimReport learning_report;
  SimReport evaluation;       ///< frozen tail policy, truncated, learned r
  SimReport evaluation_last;  ///< final greedy policy, truncated, learned r
};

std::vector<PacketPolicy> extract_greedy_policy(const LearnerState& state, const NetworkSpec& net,
                                                std::span<const FlowSpec> flows, int deadline);

/// Learns online with excess bandwidth permitted, then evaluates the frozen
/// tail policy and the final greedy policy under the truncated simulation.
LearningResult run_learning(const NetworkSpec& net, std::span<const FlowSpec> flows, int deadline,
                            const LearnerConfig& config = {});

/// CSV rows `t,running_throughput,qnorm_f...,mu_l...,r_l...`.
void write_learner_trace(std::ostream& out, const LearningResult& result);

}  // namespace timely
