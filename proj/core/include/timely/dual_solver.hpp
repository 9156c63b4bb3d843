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

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "timely/network.hpp"
#include "timely/packet_dp.hpp"

namespace timely {

/// Step schedule and stopping rule for projected dual subgradient descent.
/// Step k (1-based) is a0 / (k + offset)^exponent; any exponent in (0.5, 1]
/// keeps the steps non-summable and square-summable.
struct DualSchedule {
  double a0 = 0.3;
  double offset = 0.0;
  double exponent = 0.6;
  int max_iters = 20000;
  int window = 50;
  /// Relative tolerances on complementary slackness, feasibility and the
  /// per-iterate price movement over the trailing window.
  double tol_cs = 1e-2;
  double tol_feas = 1e-2;
  /// Relative certified duality gap (best dual bound vs feasible primal).
  double tol_gap = 2e-3;
  /// Upper end of the price box; defaults to default_mu_max().
  std::optional<double> mu_max;
  std::optional<PriceVector> initial_prices;
  bool record_history = false;
};

inline DualSchedule dual_schedule_with_iters(int max_iters) {
  DualSchedule s;
  s.max_iters = max_iters;
  return s;
}

/// Price above which no packet ever transmits on any link.
double default_mu_max(const NetworkSpec& net, std::span<const FlowSpec> flows, int deadline);

struct DualEvaluation {
  double value = 0.0;           ///< D(mu)
  double reward = 0.0;          ///< sum_f weight_f * delivered_f under pi*(mu)
  std::vector<double> usage;    ///< per-link bandwidth used by pi*(mu)
  std::vector<DpSolution> dp;   ///< per flow
  std::vector<OccupancyTable> occupancy;
};

/// Evaluates the dual function at `prices` by solving every flow's single
/// packet problem and propagating its occupancy.
DualEvaluation evaluate_dual(const NetworkSpec& net, std::span<const FlowSpec> flows,
                             const PriceVector& prices, int deadline, std::span<const double> caps);

struct DualIterate {
  int k = 0;
  double dual_value = 0.0;
  double primal_estimate = 0.0;
  std::vector<double> mu;
  std::vector<double> usage;
};

struct RelaxedSolution {
  std::vector<double> caps;
  double mu_max = 0.0;

  /// Tail-averaged prices (the reported optimum) and the last iterate.
  PriceVector prices_star;
  PriceVector prices_last;

  /// Deterministic DP policies at prices_star, one per flow.
  std::vector<ValueTable> values_star;
  std::vector<PacketPolicy> policy_star;

  /// Randomized (node, age) policies reproducing the ergodic average of the
  /// iterates' occupancy measures.
  std::vector<MixedPacketPolicy> mixed_policy;

  /// Feasible primal value: ergodic reward scaled down until every cap holds.
  double objective = 0.0;
  /// Best dual bound min_k D(mu_k); objective <= f(caps) <= dual_bound.
  double dual_bound = 0.0;
  /// Ergodic reward and usage before feasibility scaling.
  double ergodic_reward = 0.0;
  std::vector<double> ergodic_usage;
  /// Feasibility-scaled usage and caps - usage.
  std::vector<double> usage;
  std::vector<double> slack;

  int iterations = 0;
  bool converged = false;
  /// Set when the certified gap exceeds tol_gap at exit.
  bool duality_gap_flag = false;
  /// Set when some price sits at the box bound mu_max at exit.
  bool price_at_bound = false;

  std::vector<DualIterate> history;

  double duality_gap() const noexcept { return dual_bound - objective; }
};

/// Projected subgradient descent on the dual: mu <- clamp(mu + a_k (usage - cap)).
/// Never throws on non-convergence; `converged` reports it.
RelaxedSolution solve_relaxed(const NetworkSpec& net, std::span<const FlowSpec> flows,
                              std::span<const double> caps, int deadline,
                              const DualSchedule& schedule = {});

/// Per-iterate CSV: k, dual, primal, mu_l..., usage_l..., slack_l...
void write_dual_history(std::ostream& out, const RelaxedSolution& sol);

}  // namespace timely
