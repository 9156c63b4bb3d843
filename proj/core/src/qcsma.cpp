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

#include "timely/qcsma.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "timely/rng.hpp"

namespace timely {

RouteTable::RouteTable(const NetworkSpec& net, std::span<const FlowSpec> flows)
    : nodes_(net.num_nodes()) {
  const std::size_t V = net.num_nodes();
  std::vector<std::vector<LinkId>> in_links(V);
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    in_links[static_cast<std::size_t>(net.link(static_cast<LinkId>(l)).dst)].push_back(static_cast<LinkId>(l));
  }
  distance_.resize(flows.size());
  hops_.resize(flows.size());
  for (std::size_t f = 0; f < flows.size(); ++f) {
    auto& dist = distance_[f];
    dist.assign(V, -1);
    const auto d = static_cast<std::size_t>(flows[f].destination);
    dist[d] = 0;
    std::deque<std::size_t> frontier{d};
    while (!frontier.empty()) {
      const std::size_t v = frontier.front();
      frontier.pop_front();
      for (LinkId l : in_links[v]) {
        const auto u = static_cast<std::size_t>(net.link(l).src);
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          frontier.push_back(u);
        }
      }
    }
    auto& hops = hops_[f];
    hops.assign(V, {});
    for (std::size_t l = 0; l < net.num_links(); ++l) {
      const auto& link = net.link(static_cast<LinkId>(l));
      const int from = dist[static_cast<std::size_t>(link.src)];
      const int to = dist[static_cast<std::size_t>(link.dst)];
      if (from > 0 && to >= 0 && to == from - 1) {
        hops[static_cast<std::size_t>(link.src)].push_back(static_cast<LinkId>(l));
      }
    }
  }
}

std::span<const LinkId> RouteTable::next_hops(int flow, NodeId node) const {
  return hops_.at(static_cast<std::size_t>(flow)).at(static_cast<std::size_t>(node));
}

int RouteTable::distance(int flow, NodeId node) const {
  return distance_.at(static_cast<std::size_t>(flow)).at(static_cast<std::size_t>(node));
}

QcsmaState::QcsmaState(std::size_t links, int subchannels, int w, bool carry)
    : window(w),
      carryover(carry),
      previous(static_cast<std::size_t>(subchannels), std::vector<char>(links, 0)),
      drawn(static_cast<std::size_t>(subchannels), std::vector<int>(links, 0)) {
  if (w < 1) throw std::invalid_argument("Q-CSMA window must be >= 1");
  if (subchannels < 1) throw std::invalid_argument("need at least one subchannel");
}

double qcsma_transmit_probability(double queue_length) {
  return 1.0 / (1.0 + std::exp(-queue_length));
}

void qcsma_channel_access(QcsmaState& state, const NetworkSpec& net,
                          std::span<const int> queue_lengths, int subchannels, std::uint64_t seed,
                          std::int64_t slot, ChannelGrant& out) {
  const std::size_t L = net.num_links();
  if (queue_lengths.size() != L) throw std::invalid_argument("queue length vector size mismatch");
  if (state.previous.size() != static_cast<std::size_t>(subchannels)) {
    state = QcsmaState(L, subchannels, state.window, state.carryover);
  }
  out.reset(slot, subchannels, L);

  std::vector<std::pair<int, LinkId>> order;
  std::vector<char> declared(L);
  std::vector<char> collided(L);
  for (int c = 0; c < subchannels; ++c) {
    auto rng = open_stream(seed, StreamTag::kChannel, static_cast<std::uint64_t>(slot),
                           static_cast<std::uint64_t>(c));
    auto& prev = state.previous[static_cast<std::size_t>(c)];
    auto& drawn = state.drawn[static_cast<std::size_t>(c)];
    order.clear();
    for (std::size_t l = 0; l < L; ++l) {
      drawn[l] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(state.window)));
      bool eligible = true;
      if (state.carryover) {
        for (LinkId n : net.neighbors(static_cast<LinkId>(l))) {
          if (prev[static_cast<std::size_t>(n)]) {
            eligible = false;
            break;
          }
        }
      }
      if (eligible) order.emplace_back(drawn[l], static_cast<LinkId>(l));
    }
    std::sort(order.begin(), order.end());
    std::fill(declared.begin(), declared.end(), 0);
    std::fill(collided.begin(), collided.end(), 0);

    // Sub-slot by sub-slot: links blocked by an earlier intent stay silent;
    // the rest declare together and collide with same-sub-slot neighbours.
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j < order.size() && order[j].first == order[i].first) ++j;
      std::vector<LinkId> round;
      for (std::size_t k = i; k < j; ++k) {
        const LinkId l = order[k].second;
        bool blocked = false;
        for (LinkId n : net.neighbors(l)) {
          if (declared[static_cast<std::size_t>(n)]) {
            blocked = true;
            break;
          }
        }
        if (!blocked) round.push_back(l);
      }
      for (LinkId l : round) declared[static_cast<std::size_t>(l)] = 1;
      for (LinkId a : round) {
        for (LinkId b : round) {
          if (a != b && net.interferes(a, b)) collided[static_cast<std::size_t>(a)] = 1;
        }
      }
      i = j;
    }

    std::fill(prev.begin(), prev.end(), 0);
    for (std::size_t l = 0; l < L; ++l) {
      if (!declared[l] || collided[l]) continue;
      if (rng.bernoulli(qcsma_transmit_probability(queue_lengths[l]))) {
        prev[l] = 1;
        out.members.push_back(static_cast<LinkId>(l));
        ++out.grants[l];
      }
    }
    out.offsets.push_back(out.members.size());
  }
}

void edf_shortest_path_schedule(const NetworkSpec& net, std::span<const Packet> packets,
                                const ChannelGrant& grant, std::vector<Transmission>& out) {
  const std::size_t L = net.num_links();
  std::vector<std::vector<std::size_t>> queues(L);
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const LinkId l = packets[i].route;
    if (l != kIdle && net.link(l).src == packets[i].node) queues[static_cast<std::size_t>(l)].push_back(i);
  }
  for (std::size_t l = 0; l < L; ++l) {
    auto& q = queues[l];
    const auto capacity = static_cast<std::size_t>(grant.packet_capacity(net, static_cast<LinkId>(l)));
    if (capacity == 0 || q.empty()) continue;
    const std::size_t take = std::min(capacity, q.size());
    std::partial_sort(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(take), q.end(),
                      [&](std::size_t a, std::size_t b) { return earlier_deadline(packets[a], packets[b]); });
    for (std::size_t k = 0; k < take; ++k) out.push_back({q[k], static_cast<LinkId>(l)});
  }
}

QcsmaEdfPolicy::QcsmaEdfPolicy(const NetworkSpec& net, std::span<const FlowSpec> flows,
                               int subchannels, int window, bool carryover)
    : routes_(net, flows), state_(net.num_links(), subchannels, window, carryover), queue_(net.num_links()) {}

void QcsmaEdfPolicy::route(Packet& packet, Stream& rng) const {
  const auto hops = routes_.next_hops(packet.flow, packet.node);
  packet.route = hops.empty() ? kIdle : hops[rng.below(hops.size())];
}

void QcsmaEdfPolicy::on_arrival(const SlotView&, Packet& packet, Stream& rng) { route(packet, rng); }

void QcsmaEdfPolicy::on_move(const SlotView&, Packet& packet, Stream& rng) { route(packet, rng); }

void QcsmaEdfPolicy::access(const SlotView& view, ChannelGrant& grant) {
  std::fill(queue_.begin(), queue_.end(), 0);
  for (const auto& p : view.packets) {
    if (p.route != kIdle) ++queue_[static_cast<std::size_t>(p.route)];
  }
  qcsma_channel_access(state_, view.net, queue_, view.subchannels, view.seed, view.slot, grant);
}

void QcsmaEdfPolicy::schedule(const SlotView& view, const ChannelGrant& grant, Stream&,
                              std::vector<Transmission>& out) {
  edf_shortest_path_schedule(view.net, view.packets, grant, out);
}

SimReport run_qcsma_baseline(const NetworkSpec& net, std::span<const FlowSpec> flows,
                             const ScaleConfig& scale, int deadline, int window, bool carryover,
                             const SimOptions& options) {
  QcsmaEdfPolicy policy(net, flows, scale.subchannels, window, carryover);
  return run_policy(net, flows, policy, scale, deadline, options);
}

}  // namespace timely
