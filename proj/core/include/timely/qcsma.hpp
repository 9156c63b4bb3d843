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
#include <span>
#include <vector>

#include "timely/csma.hpp"
#include "timely/network.hpp"
#include "timely/sim.hpp"

namespace timely {

/// Minimum-hop next hops towards each flow's destination.
class RouteTable {
 public:
  RouteTable() = default;
  RouteTable(const NetworkSpec& net, std::span<const FlowSpec> flows);

  /// Outgoing links of `node` on some minimum-hop path to the flow's
  /// destination, ascending. Empty at the destination or when unreachable.
  std::span<const LinkId> next_hops(int flow, NodeId node) const;
  /// Hop distance to the destination; -1 when unreachable.
  int distance(int flow, NodeId node) const;

 private:
  std::size_t nodes_ = 0;
  std::vector<std::vector<int>> distance_;
  std::vector<std::vector<std::vector<LinkId>>> hops_;
};

inline constexpr int kDefaultQcsmaWindow = 10;

/// Persistent Q-CSMA channel state across slots.
struct QcsmaState {
  int window = kDefaultQcsmaWindow;
  /// When false, every link is eligible regardless of last slot's transmitters.
  bool carryover = true;
  /// Previous slot's transmitters, per subchannel: previous[c][l].
  std::vector<std::vector<char>> previous;
  /// Sub-slot drawn by each link in the last access round, per subchannel.
  std::vector<std::vector<int>> drawn;

  QcsmaState() = default;
  QcsmaState(std::size_t links, int subchannels, int window = kDefaultQcsmaWindow,
             bool carryover = true);
};

/// logistic(q) = e^q / (1 + e^q).
double qcsma_transmit_probability(double queue_length);

/// One Q-CSMA access round on every subchannel. Per subchannel c: links whose
/// neighbours did not transmit on c last slot draw w in 1..W; a link declares
/// intent in sub-slot w unless a neighbour already declared; neighbours
/// declaring in the same sub-slot collide and neither transmits. Survivors
/// transmit with probability logistic(Q_l). Subchannel c of slot t draws from
/// the stream (seed, t, c).
void qcsma_channel_access(QcsmaState& state, const NetworkSpec& net,
                          std::span<const int> queue_lengths, int subchannels, std::uint64_t seed,
                          std::int64_t slot, ChannelGrant& out);

/// Per link, packets routed on it are taken in deadline order up to
/// rate * grants. `packets[i].route` is the packet's chosen next hop.
void edf_shortest_path_schedule(const NetworkSpec& net, std::span<const Packet> packets,
                                const ChannelGrant& grant, std::vector<Transmission>& out);

/// Q-CSMA access plus EDF scheduling over shortest-path routes.
class QcsmaEdfPolicy final : public SlotPolicy {
 public:
  QcsmaEdfPolicy(const NetworkSpec& net, std::span<const FlowSpec> flows, int subchannels,
                 int window = kDefaultQcsmaWindow, bool carryover = true);

  void on_arrival(const SlotView& view, Packet& packet, Stream& rng) override;
  void on_move(const SlotView& view, Packet& packet, Stream& rng) override;
  void access(const SlotView& view, ChannelGrant& grant) override;
  void schedule(const SlotView& view, const ChannelGrant& grant, Stream& rng,
                std::vector<Transmission>& out) override;

  const RouteTable& routes() const noexcept { return routes_; }

 private:
  void route(Packet& packet, Stream& rng) const;

  RouteTable routes_;
  QcsmaState state_;
  std::vector<int> queue_;
};

SimReport run_qcsma_baseline(const NetworkSpec& net, std::span<const FlowSpec> flows,
                             const ScaleConfig& scale, int deadline,
                             int window = kDefaultQcsmaWindow, bool carryover = true,
                             const SimOptions& options = {});

}  // namespace timely
