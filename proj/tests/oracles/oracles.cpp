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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

struct StateActions {
  NodeId node;
  int age;
  std::vector<LinkId> actions;  // kIdle first
};

std::vector<StateActions> decision_states(const NetworkSpec& net, const FlowSpec& flow, int deadline) {
  std::vector<StateActions> out;
  for (NodeId i = 0; i < static_cast<NodeId>(net.num_nodes()); ++i) {
    if (i == flow.destination) continue;
    for (int s = 0; s < deadline; ++s) {
      StateActions sa{i, s, {timely::kIdle}};
      for (LinkId l : net.out_links(i)) sa.actions.push_back(l);
      out.push_back(std::move(sa));
    }
  }
  return out;
}

}  // namespace

double policy_count(const NetworkSpec& net, const FlowSpec& flow, int deadline) {
  double n = 1.0;
  for (const auto& sa : decision_states(net, flow, deadline)) n *= static_cast<double>(sa.actions.size());
  return n;
}

std::vector<double> exhaustive_values(const NetworkSpec& net, const FlowSpec& flow, const PriceVector& prices,
                                      int deadline) {
  const auto states = decision_states(net, flow, deadline);
  const std::size_t V = net.num_nodes();
  const auto at = [&](NodeId i, int s) { return static_cast<std::size_t>(i) * (deadline + 1) + s; };
  std::vector<double> best(V * (deadline + 1), -std::numeric_limits<double>::infinity());
  std::vector<double> w(V * (deadline + 1), 0.0);
  std::vector<std::size_t> digit(states.size(), 0);
  // states are ordered node-major, age-ascending; evaluation runs ages backwards.
  std::vector<std::size_t> order(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return states[a].age > states[b].age; });

  while (true) {
    for (int s = 0; s <= deadline; ++s) w[at(flow.destination, s)] = flow.weight;
    for (std::size_t i = 0; i < V; ++i) {
      if (static_cast<NodeId>(i) != flow.destination) w[at(static_cast<NodeId>(i), deadline)] = 0.0;
    }
    for (std::size_t k : order) {
      const auto& sa = states[k];
      const LinkId a = sa.actions[digit[k]];
      const double hold = w[at(sa.node, sa.age + 1)];
      if (a == timely::kIdle) {
        w[at(sa.node, sa.age)] = hold;
      } else {
        const auto& link = net.link(a);
        w[at(sa.node, sa.age)] = -prices[a] / link.rate + link.reliability * w[at(link.dst, sa.age + 1)] +
                                 (1.0 - link.reliability) * hold;
      }
    }
    for (std::size_t k = 0; k < w.size(); ++k) best[k] = std::max(best[k], w[k]);

    std::size_t pos = 0;
    while (pos < states.size() && ++digit[pos] == states[pos].actions.size()) digit[pos++] = 0;
    if (pos == states.size()) break;
  }
  return best;
}

LpResult simplex_max(const std::vector<double>& c, const std::vector<std::vector<double>>& a_eq,
                     const std::vector<double>& b_eq, const std::vector<std::vector<double>>& a_ub,
                     const std::vector<double>& b_ub) {
  constexpr double eps = 1e-11;
  const std::size_t n = c.size();
  const std::size_t me = a_eq.size();
  const std::size_t mu = a_ub.size();
  const std::size_t m = me + mu;
  const std::size_t cols = n + mu + me;  // originals, slacks, artificials
  const std::size_t rhs = cols;
  std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < mu; ++r) {
    if (b_ub[r] < 0.0) throw std::invalid_argument("simplex_max expects b_ub >= 0");
    for (std::size_t j = 0; j < n; ++j) t[r][j] = a_ub[r][j];
    t[r][n + r] = 1.0;
    t[r][rhs] = b_ub[r];
    basis[r] = n + r;
  }
  for (std::size_t e = 0; e < me; ++e) {
    const std::size_t r = mu + e;
    const double sign = b_eq[e] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[r][j] = sign * a_eq[e][j];
    t[r][n + mu + e] = 1.0;
    t[r][rhs] = sign * b_eq[e];
    basis[r] = n + mu + e;
  }

  auto pivot = [&](std::size_t pr, std::size_t pc) {
    const double p = t[pr][pc];
    for (double& x : t[pr]) x /= p;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == pr || t[r][pc] == 0.0) continue;
      const double f = t[r][pc];
      for (std::size_t j = 0; j <= cols; ++j) t[r][j] -= f * t[pr][j];
    }
    basis[pr] = pc;
  };

  // Bland's rule; returns false when unbounded.
  auto optimize = [&](const std::vector<double>& cost, std::size_t allowed) {
    while (true) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < allowed; ++j) {
        double rc = cost[j];
        for (std::size_t r = 0; r < m; ++r) rc -= cost[basis[r]] * t[r][j];
        if (rc > eps) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return true;
      std::size_t leave = m;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m; ++r) {
        if (t[r][enter] <= eps) continue;
        const double q = t[r][rhs] / t[r][enter];
        if (q < ratio - 1e-14 || (std::abs(q - ratio) <= 1e-14 && leave < m && basis[r] < basis[leave])) {
          ratio = q;
          leave = r;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  };

  LpResult res;
  std::vector<double> phase1(cols, 0.0);
  for (std::size_t e = 0; e < me; ++e) phase1[n + mu + e] = -1.0;
  optimize(phase1, cols);
  double infeas = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] >= n + mu) infeas += t[r][rhs];
  }
  if (infeas > 1e-8) return res;
  res.feasible = true;
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] < n + mu) continue;
    for (std::size_t j = 0; j < n + mu; ++j) {
      if (std::abs(t[r][j]) > 1e-9) {
        pivot(r, j);
        break;
      }
    }
  }
  std::vector<double> phase2(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  if (!optimize(phase2, n + mu)) {
    res.bounded = false;
    return res;
  }
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] < n) res.x[basis[r]] = t[r][rhs];
  }
  for (std::size_t j = 0; j < n; ++j) res.value += c[j] * res.x[j];
  return res;
}

double occupancy_lp_optimum(const NetworkSpec& net, std::span<const FlowSpec> flows, std::span<const double> caps,
                            int deadline) {
  struct Var {
    std::size_t flow;
    NodeId node;
    int age;
    LinkId action;
  };
  std::vector<Var> vars;
  for (std::size_t f = 0; f < flows.size(); ++f) {
    for (const auto& sa : decision_states(net, flows[f], deadline)) {
      for (LinkId a : sa.actions) vars.push_back({f, sa.node, sa.age, a});
    }
  }
  const std::size_t n = vars.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& v = vars[k];
    if (v.action == timely::kIdle) continue;
    const auto& link = net.link(v.action);
    if (link.dst == flows[v.flow].destination) c[k] = flows[v.flow].weight * link.reliability;
  }

  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  for (std::size_t f = 0; f < flows.size(); ++f) {
    for (const auto& sa : decision_states(net, flows[f], deadline)) {
      std::vector<double> row(n, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& v = vars[k];
        if (v.flow != f) continue;
        if (v.node == sa.node && v.age == sa.age) row[k] += 1.0;
        if (v.age + 1 != sa.age) continue;
        if (v.action == timely::kIdle) {
          if (v.node == sa.node) row[k] -= 1.0;
          continue;
        }
        const auto& link = net.link(v.action);
        if (v.node == sa.node) row[k] -= 1.0 - link.reliability;
        if (link.dst == sa.node) row[k] -= link.reliability;
      }
      a_eq.push_back(std::move(row));
      b_eq.push_back(sa.age == 0 && sa.node == flows[f].source ? flows[f].arrival_rate : 0.0);
    }
  }

  std::vector<std::vector<double>> a_ub;
  std::vector<double> b_ub;
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    std::vector<double> row(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (vars[k].action == static_cast<LinkId>(l)) row[k] = 1.0 / net.link(static_cast<LinkId>(l)).rate;
    }
    a_ub.push_back(std::move(row));
    b_ub.push_back(caps[l]);
  }
  const auto res = simplex_max(c, a_eq, b_eq, a_ub, b_ub);
  if (!res.feasible || !res.bounded) throw std::runtime_error("occupancy LP failed");
  return res.value;
}

std::vector<double> simplex_projection_by_supports(std::span<const double> v, double total) {
  const std::size_t n = v.size();
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) {
        sum += v[i];
        ++k;
      }
    }
    const double shift = (sum - total) / static_cast<double>(k);
    std::vector<double> x(n, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) {
        x[i] = v[i] - shift;
        if (x[i] < 0.0) ok = false;
      }
    }
    if (!ok) continue;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (x[i] - v[i]) * (x[i] - v[i]);
    if (d < best_dist) {
      best_dist = d;
      best = x;
    }
  }
  return best;
}

PacketMc simulate_packets(const NetworkSpec& net, const FlowSpec& flow, const timely::PacketPolicy& policy,
                          std::int64_t packets, std::uint64_t seed) {
  timely::Stream rng(seed);
  PacketMc mc;
  mc.packets = packets;
  const std::size_t L = net.num_links();
  mc.transmissions_per_packet.assign(L, 0.0);
  mc.transmissions_sq.assign(L, 0.0);
  std::vector<double> count(L);
  for (std::int64_t k = 0; k < packets; ++k) {
    std::fill(count.begin(), count.end(), 0.0);
    NodeId node = flow.source;
    for (int s = 0; s < policy.grid.deadline && node != flow.destination; ++s) {
      const LinkId a = policy.action(node, s);
      if (a == timely::kIdle) continue;
      count[static_cast<std::size_t>(a)] += 1.0;
      if (rng.bernoulli(net.link(a).reliability)) node = net.link(a).dst;
    }
    if (node == flow.destination) ++mc.delivered;
    for (std::size_t l = 0; l < L; ++l) {
      mc.transmissions_per_packet[l] += count[l];
      mc.transmissions_sq[l] += count[l] * count[l];
    }
  }
  return mc;
}

std::vector<std::vector<int>> hop_distances(const NetworkSpec& net) {
  const std::size_t V = net.num_nodes();
  constexpr int inf = 1 << 20;
  std::vector<std::vector<int>> d(V, std::vector<int>(V, inf));
  for (std::size_t i = 0; i < V; ++i) d[i][i] = 0;
  for (const auto& l : net.links()) {
    d[static_cast<std::size_t>(l.src)][static_cast<std::size_t>(l.dst)] = 1;
  }
  for (std::size_t k = 0; k < V; ++k) {
    for (std::size_t i = 0; i < V; ++i) {
      for (std::size_t j = 0; j < V; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  for (auto& row : d) {
    for (int& x : row) {
      if (x >= inf) x = -1;
    }
  }
  return d;
}

std::vector<std::vector<LinkId>> brute_force_mis(const NetworkSpec& net) {
  const std::size_t L = net.num_links();
  std::vector<std::vector<LinkId>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << L); ++mask) {
    bool independent = true;
    for (std::size_t a = 0; a < L && independent; ++a) {
      for (std::size_t b = a + 1; b < L && independent; ++b) {
        if ((mask >> a & 1U) && (mask >> b & 1U) &&
            net.interferes(static_cast<LinkId>(a), static_cast<LinkId>(b))) {
          independent = false;
        }
      }
    }
    if (!independent) continue;
    bool maximal = true;
    for (std::size_t x = 0; x < L && maximal; ++x) {
      if (mask >> x & 1U) continue;
      bool blocked = false;
      for (std::size_t a = 0; a < L; ++a) {
        if ((mask >> a & 1U) && net.interferes(static_cast<LinkId>(a), static_cast<LinkId>(x))) blocked = true;
      }
      if (!blocked) maximal = false;
    }
    if (!maximal) continue;
    std::vector<LinkId> set;
    for (std::size_t a = 0; a < L; ++a) {
      if (mask >> a & 1U) set.push_back(static_cast<LinkId>(a));
    }
    out.push_back(std::move(set));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Instance random_instance(timely::Stream& rng, int nodes, int max_out_degree) {
  std::vector<std::string> names;
  for (int i = 0; i < nodes; ++i) names.push_back("n" + std::to_string(i));
  std::vector<timely::LinkSpec> links;
  for (int i = 0; i < nodes; ++i) {
    if (i == nodes - 1) continue;  // destination
    std::vector<int> targets;
    for (int j = 0; j < nodes; ++j) {
      if (j != i) targets.push_back(j);
    }
    std::shuffle(targets.begin(), targets.end(), rng);
    int degree = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_out_degree) + 1));
    if (i == 0) degree = std::max(degree, 1);
    degree = std::min<int>(degree, static_cast<int>(targets.size()));
    for (int k = 0; k < degree; ++k) {
      timely::LinkSpec l;
      l.src = i;
      l.dst = targets[static_cast<std::size_t>(k)];
      l.reliability = 0.2 + 0.8 * rng.uniform();
      l.rate = 1 + static_cast<int>(rng.below(2));
      links.push_back(l);
    }
  }
  Instance inst;
  inst.net = timely::build_interference_from_node_sharing(NetworkSpec(names, links));
  inst.flow.source = 0;
  inst.flow.destination = nodes - 1;
  inst.flow.weight = 0.5 + 1.5 * rng.uniform();
  inst.flow.arrival_rate = 0.2 + 0.8 * rng.uniform();
  return inst;
}

}  // namespace oracle
