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

#include "timely/network.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>

#include "timely/error.hpp"

namespace timely {

namespace {

std::string link_field(std::size_t i, const char* member) {
  return "links[" + std::to_string(i) + "]." + member;
}

}  // namespace

NetworkSpec::NetworkSpec(std::vector<std::string> node_names,
                         std::vector<LinkSpec> links,
                         std::vector<InterferenceEdge> interference)
    : node_names_(std::move(node_names)), links_(std::move(links)) {
  const auto n = static_cast<int>(node_names_.size());
  for (std::size_t i = 0; i < node_names_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (node_names_[i] == node_names_[j]) {
        throw ConfigError("nodes[" + std::to_string(i) + "]",
                          "duplicate node '" + node_names_[i] + "'");
      }
    }
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (l.src < 0 || l.src >= n) throw ConfigError(link_field(i, "src"), "undeclared node");
    if (l.dst < 0 || l.dst >= n) throw ConfigError(link_field(i, "dst"), "undeclared node");
    if (l.src == l.dst) throw ConfigError(link_field(i, "dst"), "self-loop link");
    if (!(l.reliability >= 0.0 && l.reliability <= 1.0)) {
      throw ConfigError(link_field(i, "reliability"), "must lie in [0,1]");
    }
    if (l.rate < 1) throw ConfigError(link_field(i, "rate"), "must be >= 1");
  }

  const std::size_t m = links_.size();
  out_links_.assign(node_names_.size(), {});
  for (std::size_t i = 0; i < m; ++i) {
    out_links_[static_cast<std::size_t>(links_[i].src)].push_back(static_cast<LinkId>(i));
  }

  adjacency_.assign(m * m, 0);
  neighbors_.assign(m, {});
  for (std::size_t e = 0; e < interference.size(); ++e) {
    auto [a, b] = interference[e];
    const std::string field = "interference[" + std::to_string(e) + "]";
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= m || static_cast<std::size_t>(b) >= m) {
      throw ConfigError(field, "unknown link index");
    }
    if (a == b) throw ConfigError(field, "a link cannot interfere with itself");
    adjacency_[static_cast<std::size_t>(a) * m + static_cast<std::size_t>(b)] = 1;
    adjacency_[static_cast<std::size_t>(b) * m + static_cast<std::size_t>(a)] = 1;
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (adjacency_[a * m + b]) neighbors_[a].push_back(static_cast<LinkId>(b));
    }
  }
}

std::optional<NodeId> NetworkSpec::find_node(const std::string& name) const {
  auto it = std::find(node_names_.begin(), node_names_.end(), name);
  if (it == node_names_.end()) return std::nullopt;
  return static_cast<NodeId>(it - node_names_.begin());
}

bool NetworkSpec::interferes(LinkId a, LinkId b) const {
  const std::size_t m = links_.size();
  return adjacency_.at(static_cast<std::size_t>(a) * m + static_cast<std::size_t>(b)) != 0;
}

std::vector<InterferenceEdge> NetworkSpec::interference_edges() const {
  std::vector<InterferenceEdge> edges;
  for (std::size_t a = 0; a < neighbors_.size(); ++a) {
    for (LinkId b : neighbors_[a]) {
      if (static_cast<LinkId>(a) < b) edges.emplace_back(static_cast<LinkId>(a), b);
    }
  }
  return edges;
}

void NetworkSpec::validate_flow(const FlowSpec& flow, const std::string& field) const {
  const auto n = static_cast<int>(node_names_.size());
  if (flow.source < 0 || flow.source >= n) throw ConfigError(field + ".source", "undeclared node");
  if (flow.destination < 0 || flow.destination >= n) {
    throw ConfigError(field + ".destination", "undeclared node");
  }
  if (flow.source == flow.destination) {
    throw ConfigError(field + ".destination", "must differ from source");
  }
  if (!(flow.weight >= 0.0)) throw ConfigError(field + ".weight", "must be >= 0");
  if (!(flow.arrival_rate >= 0.0 && flow.arrival_rate <= 1.0)) {
    throw ConfigError(field + ".arrival_rate", "must lie in [0,1]");
  }
}

NetworkSpec build_interference_from_node_sharing(const NetworkSpec& net) {
  std::vector<InterferenceEdge> edges;
  const auto links = net.links();
  for (std::size_t a = 0; a < links.size(); ++a) {
    for (std::size_t b = a + 1; b < links.size(); ++b) {
      const auto& la = links[a];
      const auto& lb = links[b];
      if (la.src == lb.src || la.src == lb.dst || la.dst == lb.src || la.dst == lb.dst) {
        edges.emplace_back(static_cast<LinkId>(a), static_cast<LinkId>(b));
      }
    }
  }
  return NetworkSpec({net.node_names().begin(), net.node_names().end()},
                     {links.begin(), links.end()}, std::move(edges));
}

namespace {

using Mask = std::uint64_t;

struct Enumerator {
  std::vector<Mask> compatible;  // complement-graph neighbourhoods
  std::vector<Mask> found;

  void run(Mask r, Mask p, Mask x) {
    if (p == 0) {
      if (x == 0) found.push_back(r);
      return;
    }
    // Pivot maximizing |P ∩ compatible(u)| over u in P ∪ X.
    Mask px = p | x;
    int pivot = std::countr_zero(px);
    int best = -1;
    for (Mask rest = px; rest != 0; rest &= rest - 1) {
      int u = std::countr_zero(rest);
      int score = std::popcount(p & compatible[static_cast<std::size_t>(u)]);
      if (score > best) {
        best = score;
        pivot = u;
      }
    }
    for (Mask cand = p & ~compatible[static_cast<std::size_t>(pivot)]; cand != 0; cand &= cand - 1) {
      int v = std::countr_zero(cand);
      Mask bit = Mask{1} << v;
      const Mask nv = compatible[static_cast<std::size_t>(v)];
      run(r | bit, p & nv, x & nv);
      p &= ~bit;
      x |= bit;
    }
  }
};

}  // namespace

IndependentSetFamily enumerate_maximal_independent_sets(const NetworkSpec& net, std::size_t cap) {
  const std::size_t m = net.num_links();
  if (m > cap || m > 64) throw GraphTooLarge(m, std::min<std::size_t>(cap, 64));

  IndependentSetFamily family;
  family.index.assign(m, {});
  if (m == 0) return family;

  Enumerator e;
  e.compatible.assign(m, 0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a != b && !net.interferes(static_cast<LinkId>(a), static_cast<LinkId>(b))) {
        e.compatible[a] |= Mask{1} << b;
      }
    }
  }
  const Mask all = (m == 64) ? ~Mask{0} : ((Mask{1} << m) - 1);
  e.run(0, all, 0);

  for (Mask s : e.found) {
    std::vector<LinkId> members;
    for (Mask rest = s; rest != 0; rest &= rest - 1) members.push_back(std::countr_zero(rest));
    family.sets.push_back(std::move(members));
  }
  std::sort(family.sets.begin(), family.sets.end());
  for (std::size_t k = 0; k < family.sets.size(); ++k) {
    for (LinkId l : family.sets[k]) family.index[static_cast<std::size_t>(l)].push_back(static_cast<int>(k));
  }
  return family;
}

bool is_maximal_independent(const NetworkSpec& net, std::span<const LinkId> set) {
  std::vector<char> member(net.num_links(), 0);
  for (LinkId l : set) member[static_cast<std::size_t>(l)] = 1;
  for (LinkId a : set) {
    for (LinkId b : net.neighbors(a)) {
      if (member[static_cast<std::size_t>(b)]) return false;
    }
  }
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    if (member[l]) continue;
    bool blocked = false;
    for (LinkId b : net.neighbors(static_cast<LinkId>(l))) {
      if (member[static_cast<std::size_t>(b)]) {
        blocked = true;
        break;
      }
    }
    if (!blocked) return false;
  }
  return true;
}

}  // namespace timely
