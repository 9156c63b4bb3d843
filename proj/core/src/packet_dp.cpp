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

#include "timely/packet_dp.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace timely {

MixedPacketPolicy MixedPacketPolicy::from(const PacketPolicy& policy) {
  MixedPacketPolicy mixed;
  mixed.flow = policy.flow;
  mixed.grid = policy.grid;
  mixed.choices.resize(policy.actions.size());
  for (std::size_t k = 0; k < policy.actions.size(); ++k) mixed.choices[k] = {{policy.actions[k], 1.0}};
  return mixed;
}

LinkId MixedPacketPolicy::sample(NodeId node, int age, double u) const {
  const auto& dist = choices[grid.at(node, age)];
  if (dist.empty()) return kIdle;
  double acc = 0.0;
  for (const auto& [action, prob] : dist) {
    acc += prob;
    if (u < acc) return action;
  }
  return dist.back().first;
}

DpSolution solve_single_packet_dp(const NetworkSpec& net, const FlowSpec& flow, int flow_id,
                                  const PriceVector& prices, int deadline) {
  if (deadline < 1) throw std::invalid_argument("deadline must be >= 1");
  if (prices.size() != net.num_links()) throw std::invalid_argument("price vector size mismatch");

  const StateGrid grid{net.num_nodes(), deadline};
  DpSolution sol;
  sol.values = ValueTable{flow_id, grid, std::vector<double>(grid.size(), 0.0)};
  sol.policy = PacketPolicy{flow_id, grid, std::vector<LinkId>(grid.size(), kIdle)};
  auto& v = sol.values.values;
  auto& act = sol.policy.actions;

  const auto dest = flow.destination;
  for (int s = 0; s <= deadline; ++s) v[grid.at(dest, s)] = flow.weight;

  for (int s = deadline - 1; s >= 0; --s) {
    for (NodeId i = 0; i < static_cast<NodeId>(grid.num_nodes); ++i) {
      if (i == dest) continue;
      const double stay = v[grid.at(i, s + 1)];
      double best = stay;
      LinkId choice = kIdle;
      for (LinkId l : net.out_links(i)) {
        const auto& link = net.link(l);
        const double p = link.reliability;
        const double value = -prices[l] / link.rate + p * v[grid.at(link.dst, s + 1)] + (1.0 - p) * stay;
        if (value > best) {
          best = value;
          choice = l;
        }
      }
      v[grid.at(i, s)] = best;
      act[grid.at(i, s)] = choice;
    }
  }
  return sol;
}

namespace {

template <typename ForEachAction>
OccupancyTable propagate(const NetworkSpec& net, const FlowSpec& flow, int flow_id,
                         const StateGrid& grid, ForEachAction&& for_each_action) {
  OccupancyTable occ;
  occ.flow = flow_id;
  occ.grid = grid;
  occ.mass.assign(grid.size(), 0.0);
  const std::size_t width = net.num_links() + 1;
  occ.action_mass.assign(grid.size() * width, 0.0);
  occ.link_usage.assign(net.num_links(), 0.0);

  const auto dest = flow.destination;
  occ.mass[grid.at(flow.source, 0)] = flow.arrival_rate;
  for (int s = 0; s < grid.deadline; ++s) {
    for (NodeId i = 0; i < static_cast<NodeId>(grid.num_nodes); ++i) {
      if (i == dest) continue;
      const std::size_t state = grid.at(i, s);
      const double m = occ.mass[state];
      if (m == 0.0) continue;
      for_each_action(i, s, [&](LinkId action, double prob) {
        const double share = m * prob;
        if (share == 0.0) return;
        occ.action_mass[state * width + static_cast<std::size_t>(action + 1)] += share;
        if (action == kIdle) {
          occ.mass[grid.at(i, s + 1)] += share;
          return;
        }
        const auto& link = net.link(action);
        occ.link_usage[static_cast<std::size_t>(action)] += share / link.rate;
        const double moved = share * link.reliability;
        if (link.dst == dest) {
          occ.delivered += moved;
        } else {
          occ.mass[grid.at(link.dst, s + 1)] += moved;
        }
        occ.mass[grid.at(i, s + 1)] += share - moved;
      });
    }
  }
  for (NodeId i = 0; i < static_cast<NodeId>(grid.num_nodes); ++i) {
    if (i != dest) occ.expired += occ.mass[grid.at(i, grid.deadline)];
  }
  return occ;
}

}  // namespace

OccupancyTable compute_occupancy(const NetworkSpec& net, const FlowSpec& flow,
                                 const PacketPolicy& policy) {
  return propagate(net, flow, policy.flow, policy.grid, [&](NodeId i, int s, auto&& emit) {
    emit(policy.action(i, s), 1.0);
  });
}

OccupancyTable compute_occupancy(const NetworkSpec& net, const FlowSpec& flow,
                                 const MixedPacketPolicy& policy) {
  return propagate(net, flow, policy.flow, policy.grid, [&](NodeId i, int s, auto&& emit) {
    for (const auto& [action, prob] : policy.choices[policy.grid.at(i, s)]) emit(action, prob);
  });
}

void write_policy_table(std::ostream& out, const NetworkSpec& net,
                        std::span<const ValueTable> values,
                        std::span<const PacketPolicy> policies) {
  out << "flow,node,age,action,next_hop,value\n";
  const auto old_precision = out.precision(17);
  for (std::size_t f = 0; f < policies.size(); ++f) {
    const auto& pol = policies[f];
    const auto& val = values[f];
    for (NodeId i = 0; i < static_cast<NodeId>(pol.grid.num_nodes); ++i) {
      for (int s = 0; s <= pol.grid.deadline; ++s) {
        const LinkId a = pol.action(i, s);
        out << pol.flow << ',' << net.node_name(i) << ',' << s << ',';
        if (a == kIdle) {
          out << "idle,";
        } else {
          out << "tx:" << a << ',' << net.node_name(net.link(a).dst);
        }
        out << ',' << val.at(i, s) << '\n';
      }
    }
  }
  out.precision(old_precision);
}

}  // namespace timely
