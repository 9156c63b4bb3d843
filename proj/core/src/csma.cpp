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

#include "timely/csma.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "timely/rng.hpp"

namespace timely {

double cumulative_aggression(const NetworkSpec& net, const AggressionVector& r, LinkId l) {
  double total = r[l];
  for (LinkId n : net.neighbors(l)) total += r[n];
  return total;
}

double access_probability(const NetworkSpec& net, const AggressionVector& r, LinkId l) {
  return r[l] / cumulative_aggression(net, r, l);
}

std::vector<double> access_probabilities(const NetworkSpec& net, const AggressionVector& r) {
  if (r.size() != net.num_links()) throw std::invalid_argument("aggression vector size mismatch");
  std::vector<double> p(net.num_links());
  for (std::size_t l = 0; l < p.size(); ++l) p[l] = access_probability(net, r, static_cast<LinkId>(l));
  return p;
}

void ChannelGrant::reset(std::int64_t t, int n, std::size_t links) {
  slot = t;
  subchannels = n;
  members.clear();
  offsets.assign(1, 0);
  grants.assign(links, 0);
}

void sample_slot_into(const NetworkSpec& net, const AggressionVector& r, int subchannels,
                      std::uint64_t seed, std::int64_t slot, ChannelGrant& out) {
  if (subchannels < 1) throw std::invalid_argument("need at least one subchannel");
  const std::size_t L = net.num_links();
  out.reset(slot, subchannels, L);

  thread_local std::vector<std::pair<double, LinkId>> order;
  thread_local std::vector<char> active;
  order.resize(L);
  active.assign(L, 0);

  for (int c = 0; c < subchannels; ++c) {
    auto rng = open_stream(seed, StreamTag::kChannel, static_cast<std::uint64_t>(slot), static_cast<std::uint64_t>(c));
    for (std::size_t l = 0; l < L; ++l) order[l] = {rng.exponential(r.r[l]), static_cast<LinkId>(l)};
    std::sort(order.begin(), order.end());
    const std::size_t begin = out.members.size();
    for (const auto& [counter, l] : order) {
      bool blocked = false;
      for (LinkId n : net.neighbors(l)) {
        if (active[static_cast<std::size_t>(n)]) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        active[static_cast<std::size_t>(l)] = 1;
        out.members.push_back(l);
        ++out.grants[static_cast<std::size_t>(l)];
      }
    }
    std::sort(out.members.begin() + static_cast<std::ptrdiff_t>(begin), out.members.end());
    for (std::size_t k = begin; k < out.members.size(); ++k) active[static_cast<std::size_t>(out.members[k])] = 0;
    out.offsets.push_back(out.members.size());
  }
}

ChannelGrant sample_slot(const NetworkSpec& net, const AggressionVector& r, int subchannels,
                         std::uint64_t seed, std::int64_t slot) {
  ChannelGrant grant;
  sample_slot_into(net, r, subchannels, seed, slot, grant);
  return grant;
}

void write_grants(std::ostream& out, const ChannelGrant& grant, bool header) {
  if (header) out << "slot,link,grants\n";
  for (std::size_t l = 0; l < grant.grants.size(); ++l) {
    out << grant.slot << ',' << l << ',' << grant.grants[l] << '\n';
  }
}

}  // namespace timely
