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
#include <iosfwd>
#include <span>
#include <vector>

#include "timely/network.hpp"

namespace timely {

/// CSMA aggression parameters: link l backs off for Exp(r_l) time.
struct AggressionVector {
  std::vector<double> r;

  AggressionVector() = default;
  explicit AggressionVector(std::size_t links, double value = 1.0) : r(links, value) {}
  explicit AggressionVector(std::vector<double> values) : r(std::move(values)) {}

  std::size_t size() const noexcept { return r.size(); }
  double operator[](LinkId l) const { return r[static_cast<std::size_t>(l)]; }
  double& operator[](LinkId l) { return r[static_cast<std::size_t>(l)]; }
};

/// R_l = r_l + sum of the interference neighbours' aggressions.
double cumulative_aggression(const NetworkSpec& net, const AggressionVector& r, LinkId l);

/// r_l / R_l: exact for a link whose conflict component is a clique, the
/// modelling surrogate otherwise.
double access_probability(const NetworkSpec& net, const AggressionVector& r, LinkId l);
std::vector<double> access_probabilities(const NetworkSpec& net, const AggressionVector& r);

/// Outcome of channel access in one slot over N subchannels.
struct ChannelGrant {
  std::int64_t slot = 0;
  int subchannels = 0;
  /// Active links of subchannel c are members[offsets[c] .. offsets[c+1]).
  std::vector<LinkId> members;
  std::vector<std::size_t> offsets;
  /// Number of subchannels granted to each link (0..N).
  std::vector<int> grants;

  std::span<const LinkId> subchannel(int c) const {
    const auto b = offsets[static_cast<std::size_t>(c)];
    const auto e = offsets[static_cast<std::size_t>(c) + 1];
    return std::span<const LinkId>(members).subspan(b, e - b);
  }

  /// Packets link l may carry this slot.
  int packet_capacity(const NetworkSpec& net, LinkId l) const {
    return net.link(l).rate * grants[static_cast<std::size_t>(l)];
  }

  void reset(std::int64_t t, int n, std::size_t links);
};

/// Runs the exponential counter race independently on each of N subchannels.
/// Links are visited in ascending counter order and activate unless an
/// already active neighbour blocks them. Subchannel c of slot t draws from
/// its own stream derived from (seed, t, c).
ChannelGrant sample_slot(const NetworkSpec& net, const AggressionVector& r, int subchannels,
                         std::uint64_t seed, std::int64_t slot = 0);

/// Allocation-free variant for the simulator's inner loop.
void sample_slot_into(const NetworkSpec& net, const AggressionVector& r, int subchannels,
                      std::uint64_t seed, std::int64_t slot, ChannelGrant& out);

/// CSV rows `slot,link,grants`.
void write_grants(std::ostream& out, const ChannelGrant& grant, bool header);

}  // namespace timely
