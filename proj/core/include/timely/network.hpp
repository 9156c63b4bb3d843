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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace timely {

/// Dense node index, 0..num_nodes()-1.
using NodeId = int;
/// Dense link index, 0..num_links()-1.
using LinkId = int;

/// A directed wireless link. `rate` is the number of packets one unit of
/// bandwidth carries on this link in a slot.
struct LinkSpec {
  NodeId src = 0;
  NodeId dst = 0;
  double reliability = 1.0;
  int rate = 1;
};

struct FlowSpec {
  NodeId source = 0;
  NodeId destination = 0;
  double weight = 1.0;
  /// Bernoulli success probability per slot at scale 1.
  double arrival_rate = 0.0;
};

using InterferenceEdge = std::pair<LinkId, LinkId>;

/// Directed link graph plus its undirected edge interference graph.
///
/// Immutable after construction. The constructor validates every invariant
/// (endpoints declared, no self loops, reliability in [0,1], rate >= 1,
/// interference symmetric and irreflexive) and throws ConfigError naming the
/// offending field.
class NetworkSpec {
 public:
  NetworkSpec() = default;
  NetworkSpec(std::vector<std::string> node_names, std::vector<LinkSpec> links,
              std::vector<InterferenceEdge> interference = {});

  std::size_t num_nodes() const noexcept { return node_names_.size(); }
  std::size_t num_links() const noexcept { return links_.size(); }

  const LinkSpec& link(LinkId l) const { return links_.at(static_cast<std::size_t>(l)); }
  std::span<const LinkSpec> links() const noexcept { return links_; }

  const std::string& node_name(NodeId n) const { return node_names_.at(static_cast<std::size_t>(n)); }
  std::span<const std::string> node_names() const noexcept { return node_names_; }
  std::optional<NodeId> find_node(const std::string& name) const;

  /// Links whose source is `n`, ascending by link id.
  std::span<const LinkId> out_links(NodeId n) const { return out_links_.at(static_cast<std::size_t>(n)); }

  /// Interference neighbours of `l`, ascending by link id.
  std::span<const LinkId> neighbors(LinkId l) const { return neighbors_.at(static_cast<std::size_t>(l)); }
  bool interferes(LinkId a, LinkId b) const;

  /// Undirected interference edges (a < b), sorted.
  std::vector<InterferenceEdge> interference_edges() const;

  /// Throws ConfigError (with `field` as prefix) if the flow is invalid here.
  void validate_flow(const FlowSpec& flow, const std::string& field = "flow") const;

 private:
  std::vector<std::string> node_names_;
  std::vector<LinkSpec> links_;
  std::vector<std::vector<LinkId>> out_links_;
  std::vector<std::vector<LinkId>> neighbors_;
  std::vector<char> adjacency_;
};

/// Family of all maximal independent sets of the interference graph.
struct IndependentSetFamily {
  /// Each set sorted ascending; the family sorted lexicographically.
  std::vector<std::vector<LinkId>> sets;
  /// index[l] lists the ids of the sets containing link l.
  std::vector<std::vector<int>> index;

  std::size_t size() const noexcept { return sets.size(); }
};

inline constexpr std::size_t kDefaultEnumerationCap = 24;

/// Returns a copy of `net` whose interference graph joins every pair of
/// distinct links sharing an endpoint. Any existing interference is replaced.
NetworkSpec build_interference_from_node_sharing(const NetworkSpec& net);

/// Enumerates all maximal independent sets (Bron-Kerbosch with pivoting on
/// the complement graph). Throws GraphTooLarge above `cap` links.
IndependentSetFamily enumerate_maximal_independent_sets(
    const NetworkSpec& net, std::size_t cap = kDefaultEnumerationCap);

/// True when `set` is independent and maximal in the interference graph.
bool is_maximal_independent(const NetworkSpec& net, std::span<const LinkId> set);

}  // namespace timely
