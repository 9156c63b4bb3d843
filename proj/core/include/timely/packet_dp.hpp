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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "timely/network.hpp"

namespace timely {

/// Per-link price of one unit of bandwidth per slot (Lagrange multipliers of
/// the average bandwidth constraints).
struct PriceVector {
  std::vector<double> mu;

  PriceVector() = default;
  explicit PriceVector(std::size_t links, double value = 0.0) : mu(links, value) {}
  explicit PriceVector(std::vector<double> values) : mu(std::move(values)) {}

  std::size_t size() const noexcept { return mu.size(); }
  double operator[](LinkId l) const { return mu[static_cast<std::size_t>(l)]; }
  double& operator[](LinkId l) { return mu[static_cast<std::size_t>(l)]; }
};

inline constexpr LinkId kIdle = -1;

/// Indexing shared by the (node, age) tables: ages run 0..deadline inclusive.
struct StateGrid {
  std::size_t num_nodes = 0;
  int deadline = 1;

  std::size_t size() const noexcept { return num_nodes * static_cast<std::size_t>(deadline + 1); }
  std::size_t at(NodeId node, int age) const noexcept {
    return static_cast<std::size_t>(node) * static_cast<std::size_t>(deadline + 1) + static_cast<std::size_t>(age);
  }
  bool operator==(const StateGrid&) const = default;
};

/// V(i, s) for one flow.
struct ValueTable {
  int flow = 0;
  StateGrid grid;
  std::vector<double> values;

  double at(NodeId node, int age) const { return values[grid.at(node, age)]; }
};

/// Deterministic (node, age) -> {idle, transmit on link} map for one flow.
struct PacketPolicy {
  int flow = 0;
  StateGrid grid;
  std::vector<LinkId> actions;

  LinkId action(NodeId node, int age) const { return actions[grid.at(node, age)]; }
  bool operator==(const PacketPolicy&) const = default;
};

/// Randomized (node, age) policy: each state carries a distribution over
/// {idle} plus the node's outgoing links. Produced by primal recovery in the
/// dual solver; a deterministic policy is the point-mass special case.
struct MixedPacketPolicy {
  int flow = 0;
  StateGrid grid;
  /// choices[state] = (action, probability) pairs summing to 1.
  std::vector<std::vector<std::pair<LinkId, double>>> choices;

  static MixedPacketPolicy from(const PacketPolicy& policy);

  /// Draws an action for a packet in (node, age) given u ~ U[0,1).
  LinkId sample(NodeId node, int age, double u) const;
};

/// Expected per-slot mass of one flow's packets over (node, age) at scale 1.
struct OccupancyTable {
  int flow = 0;
  StateGrid grid;
  std::vector<double> mass;
  /// action_mass[state * (links + 1) + (action + 1)], action kIdle -> slot 0.
  std::vector<double> action_mass;
  /// Expected bandwidth used per slot on each link: packets / rate.
  std::vector<double> link_usage;
  double delivered = 0.0;
  double expired = 0.0;
};

struct DpSolution {
  ValueTable values;
  PacketPolicy policy;
};

/// Backward induction for the single packet transportation problem at the
/// given link prices. Each transmission on link l costs mu_l / rate_l; the
/// packet earns the flow weight on reaching its destination by `deadline`.
/// Ties prefer idling, then the lowest link id.
DpSolution solve_single_packet_dp(const NetworkSpec& net, const FlowSpec& flow, int flow_id,
                                  const PriceVector& prices, int deadline);

/// Forward propagation of a flow's arrival mass under `policy`.
OccupancyTable compute_occupancy(const NetworkSpec& net, const FlowSpec& flow,
                                 const PacketPolicy& policy);
OccupancyTable compute_occupancy(const NetworkSpec& net, const FlowSpec& flow,
                                 const MixedPacketPolicy& policy);

/// Writes rows `flow,node,age,action,next_hop,value` (header included).
void write_policy_table(std::ostream& out, const NetworkSpec& net,
                        std::span<const ValueTable> values,
                        std::span<const PacketPolicy> policies);

}  // namespace timely
