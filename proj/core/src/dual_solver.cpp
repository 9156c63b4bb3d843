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

#include "timely/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace timely {

double default_mu_max(const NetworkSpec& net, std::span<const FlowSpec> flows, int deadline) {
  double weights = 0.0;
  for (const auto& f : flows) weights += f.weight;
  int max_rate = 1;
  for (const auto& l : net.links()) max_rate = std::max(max_rate, l.rate);
  return std::max(weights, 1e-12) * std::max(1, deadline) * max_rate;
}

DualEvaluation evaluate_dual(const NetworkSpec& net, std::span<const FlowSpec> flows,
                             const PriceVector& prices, int deadline, std::span<const double> caps) {
  if (caps.size() != net.num_links()) throw std::invalid_argument("caps size mismatch");
  DualEvaluation ev;
  ev.usage.assign(net.num_links(), 0.0);
  ev.dp.reserve(flows.size());
  ev.occupancy.reserve(flows.size());
  for (std::size_t f = 0; f < flows.size(); ++f) {
    const auto& flow = flows[f];
    auto dp = solve_single_packet_dp(net, flow, static_cast<int>(f), prices, deadline);
    auto occ = compute_occupancy(net, flow, dp.policy);
    ev.value += flow.arrival_rate * dp.values.at(flow.source, 0);
    ev.reward += flow.weight * occ.delivered;
    for (std::size_t l = 0; l < ev.usage.size(); ++l) ev.usage[l] += occ.link_usage[l];
    ev.dp.push_back(std::move(dp));
    ev.occupancy.push_back(std::move(occ));
  }
  for (std::size_t l = 0; l < caps.size(); ++l) ev.value += prices.mu[l] * caps[l];
  return ev;
}

namespace {

/// Step-weighted running averages of the iterates.
struct Ergodic {
  double weight = 0.0;
  double reward = 0.0;
  std::vector<double> usage;
  std::vector<double> mu;
  std::vector<std::vector<double>> action_mass;

  void reset(std::size_t links, std::size_t flows) {
    weight = 0.0;
    reward = 0.0;
    usage.assign(links, 0.0);
    mu.assign(links, 0.0);
    action_mass.assign(flows, {});
  }

  void add(double w, const DualEvaluation& ev, const PriceVector& prices) {
    weight += w;
    reward += w * ev.reward;
    for (std::size_t l = 0; l < usage.size(); ++l) {
      usage[l] += w * ev.usage[l];
      mu[l] += w * prices.mu[l];
    }
    for (std::size_t f = 0; f < action_mass.size(); ++f) {
      const auto& src = ev.occupancy[f].action_mass;
      auto& dst = action_mass[f];
      if (dst.empty()) dst.assign(src.size(), 0.0);
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += w * src[k];
    }
  }

  double mean_reward() const { return weight > 0 ? reward / weight : 0.0; }
  std::vector<double> mean(const std::vector<double>& acc) const {
    std::vector<double> out(acc.size(), 0.0);
    if (weight > 0) {
      for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i] / weight;
    }
    return out;
  }
};

/// Largest t in [0,1] with t * usage <= caps componentwise.
double feasibility_scale(std::span<const double> usage, std::span<const double> caps) {
  double theta = 1.0;
  for (std::size_t l = 0; l < usage.size(); ++l) {
    if (usage[l] > caps[l]) theta = std::min(theta, caps[l] / usage[l]);
  }
  return std::max(theta, 0.0);
}

MixedPacketPolicy recover_mixed(const NetworkSpec& net, const PacketPolicy& fallback,
                                const std::vector<double>& action_mass) {
  MixedPacketPolicy mixed;
  mixed.flow = fallback.flow;
  mixed.grid = fallback.grid;
  mixed.choices.resize(fallback.grid.size());
  const std::size_t width = net.num_links() + 1;
  for (std::size_t state = 0; state < fallback.grid.size(); ++state) {
    double total = 0.0;
    for (std::size_t a = 0; a < width; ++a) total += action_mass.empty() ? 0.0 : action_mass[state * width + a];
    auto& dist = mixed.choices[state];
    if (total > 0.0) {
      for (std::size_t a = 0; a < width; ++a) {
        const double x = action_mass[state * width + a];
        if (x > 0.0) dist.emplace_back(static_cast<LinkId>(a) - 1, x / total);
      }
    }
    if (dist.empty()) dist.emplace_back(fallback.actions[state], 1.0);
  }
  return mixed;
}

/// Feasible point built from an averaged occupancy measure: transmissions on
/// link l are kept with probability keep_link[l] and otherwise the packet
/// idles until it expires; a share 1 - keep_source of arrivals never moves.
/// Dropping only removes mass, so link l's usage is at most keep_link[l]
/// times the original.
struct Repaired {
  double reward = 0.0;
  std::vector<double> usage;
  std::vector<MixedPacketPolicy> policies;
};

Repaired repair(const NetworkSpec& net, std::span<const FlowSpec> flows,
                std::span<const MixedPacketPolicy> base, std::span<const PacketPolicy> fallback,
                std::span<const double> keep_link, double keep_source) {
  const std::size_t L = net.num_links();
  const std::size_t width = L + 1;
  Repaired out;
  out.usage.assign(L, 0.0);
  for (std::size_t f = 0; f < flows.size(); ++f) {
    const auto& pol = base[f];
    const auto& grid = pol.grid;
    const auto dest = flows[f].destination;
    std::vector<double> active(grid.size(), 0.0);
    std::vector<double> frozen(grid.size(), 0.0);
    std::vector<double> mass(grid.size() * width, 0.0);
    const std::size_t start = grid.at(flows[f].source, 0);
    active[start] = flows[f].arrival_rate * keep_source;
    frozen[start] = flows[f].arrival_rate * (1.0 - keep_source);
    double delivered = 0.0;
    for (int s = 0; s < grid.deadline; ++s) {
      for (NodeId i = 0; i < static_cast<NodeId>(grid.num_nodes); ++i) {
        if (i == dest) continue;
        const std::size_t state = grid.at(i, s);
        const std::size_t later = grid.at(i, s + 1);
        if (frozen[state] > 0.0) {
          mass[state * width] += frozen[state];
          frozen[later] += frozen[state];
        }
        const double m = active[state];
        if (m == 0.0) continue;
        for (const auto& [action, prob] : pol.choices[state]) {
          const double share = m * prob;
          if (action == kIdle) {
            mass[state * width] += share;
            active[later] += share;
            continue;
          }
          const auto l = static_cast<std::size_t>(action);
          const auto& link = net.link(action);
          const double sent = share * keep_link[l];
          mass[state * width] += share - sent;
          frozen[later] += share - sent;
          mass[state * width + l + 1] += sent;
          out.usage[l] += sent / link.rate;
          const double moved = sent * link.reliability;
          if (link.dst == dest) {
            delivered += moved;
          } else {
            active[grid.at(link.dst, s + 1)] += moved;
          }
          active[later] += sent - moved;
        }
      }
    }
    out.reward += flows[f].weight * delivered;
    out.policies.push_back(recover_mixed(net, fallback[f], mass));
  }
  return out;
}

/// Better of the per-link repair and uniform source thinning.
Repaired best_feasible(const NetworkSpec& net, std::span<const FlowSpec> flows,
                       std::span<const double> caps, const Ergodic& e,
                       std::span<const PacketPolicy> fallback) {
  std::vector<MixedPacketPolicy> base;
  for (std::size_t f = 0; f < flows.size(); ++f) base.push_back(recover_mixed(net, fallback[f], e.action_mass[f]));
  const auto usage = e.mean(e.usage);
  std::vector<double> keep(usage.size(), 1.0);
  for (std::size_t l = 0; l < usage.size(); ++l) {
    if (usage[l] > caps[l]) keep[l] = caps[l] / usage[l];
  }
  auto per_link = repair(net, flows, base, fallback, keep, 1.0);
  auto thinned = repair(net, flows, base, fallback, std::vector<double>(usage.size(), 1.0),
                        feasibility_scale(usage, caps));
  return per_link.reward >= thinned.reward ? std::move(per_link) : std::move(thinned);
}

}  // namespace

RelaxedSolution solve_relaxed(const NetworkSpec& net, std::span<const FlowSpec> flows,
                              std::span<const double> caps, int deadline,
                              const DualSchedule& schedule) {
  const std::size_t L = net.num_links();
  if (caps.size() != L) throw std::invalid_argument("caps size mismatch");
  for (double c : caps) {
    if (!(c >= 0.0)) throw std::invalid_argument("caps must be >= 0");
  }
  if (schedule.max_iters < 1 || schedule.window < 1) throw std::invalid_argument("bad schedule");
  if (!(schedule.exponent > 0.5 && schedule.exponent <= 1.0)) throw std::invalid_argument("step exponent must lie in (0.5, 1]");

  RelaxedSolution sol;
  sol.caps.assign(caps.begin(), caps.end());
  sol.mu_max = schedule.mu_max.value_or(default_mu_max(net, flows, deadline));

  PriceVector prices(L, 0.0);
  if (schedule.initial_prices) {
    if (schedule.initial_prices->size() != L) throw std::invalid_argument("initial prices size mismatch");
    prices = *schedule.initial_prices;
    for (double& m : prices.mu) m = std::clamp(m, 0.0, sol.mu_max);
  }

  Ergodic older;
  Ergodic newer;
  older.reset(L, flows.size());
  newer.reset(L, flows.size());
  long boundary = 1;

  double dual_bound = std::numeric_limits<double>::infinity();
  int last_big_step = 0;
  int k = 1;
  bool converged = false;
  double primal = 0.0;

  auto primal_from = [&](const Ergodic& e) {
    const auto u = e.mean(e.usage);
    return feasibility_scale(u, caps) * e.mean_reward();
  };

  for (; k <= schedule.max_iters; ++k) {
    const auto ev = evaluate_dual(net, flows, prices, deadline, caps);
    dual_bound = std::min(dual_bound, ev.value);

    const double step = schedule.a0 / std::pow(static_cast<double>(k) + schedule.offset, schedule.exponent);
    if (k == 2 * boundary) {
      older = newer;
      newer.reset(L, flows.size());
      boundary *= 2;
    }
    older.add(step, ev, prices);
    newer.add(step, ev, prices);
    primal = primal_from(older);

    if (schedule.record_history) {
      DualIterate it;
      it.k = k;
      it.dual_value = ev.value;
      it.primal_estimate = primal;
      it.mu = prices.mu;
      it.usage = ev.usage;
      sol.history.push_back(std::move(it));
    }

    double max_step = 0.0;
    double max_mu = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double next = std::clamp(prices.mu[l] + step * (ev.usage[l] - caps[l]), 0.0, sol.mu_max);
      max_step = std::max(max_step, std::abs(next - prices.mu[l]));
      prices.mu[l] = next;
      max_mu = std::max(max_mu, next);
    }
    if (max_step > schedule.tol_cs * std::max(1.0, max_mu)) last_big_step = k;

    if (k < 2 * schedule.window || k - last_big_step < schedule.window) continue;

    const auto usage = older.mean(older.usage);
    const auto mu_bar = older.mean(older.mu);
    const double scale = std::max(1.0, std::abs(primal));
    bool ok = true;
    for (std::size_t l = 0; l < L && ok; ++l) {
      if (usage[l] > caps[l] + schedule.tol_feas * std::max(1.0, caps[l])) ok = false;
      if (mu_bar[l] * std::abs(usage[l] - caps[l]) > schedule.tol_cs * scale) ok = false;
    }
    if (!ok || k % schedule.window != 0) continue;
    std::vector<PacketPolicy> current;
    for (const auto& dp : ev.dp) current.push_back(dp.policy);
    primal = std::max(primal, best_feasible(net, flows, caps, older, current).reward);
    if (dual_bound - primal > schedule.tol_gap * std::max(1.0, dual_bound)) {
      const auto ev_bar = evaluate_dual(net, flows, PriceVector(mu_bar), deadline, caps);
      dual_bound = std::min(dual_bound, ev_bar.value);
    }
    if (dual_bound - primal <= schedule.tol_gap * std::max(1.0, dual_bound)) {
      converged = true;
      break;
    }
  }

  sol.iterations = std::min(k, schedule.max_iters);
  sol.converged = converged;
  sol.prices_last = prices;
  sol.prices_star = PriceVector(older.mean(older.mu));

  const auto star = evaluate_dual(net, flows, sol.prices_star, deadline, caps);
  dual_bound = std::min(dual_bound, star.value);
  for (const auto& dp : star.dp) {
    sol.values_star.push_back(dp.values);
    sol.policy_star.push_back(dp.policy);
  }
  auto feasible = best_feasible(net, flows, caps, older, sol.policy_star);
  sol.mixed_policy = std::move(feasible.policies);
  sol.ergodic_reward = older.mean_reward();
  sol.ergodic_usage = older.mean(older.usage);
  sol.objective = feasible.reward;
  sol.dual_bound = dual_bound;
  sol.usage = std::move(feasible.usage);
  sol.slack.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    sol.slack[l] = caps[l] - sol.usage[l];
    if (sol.prices_last.mu[l] >= sol.mu_max * (1.0 - 1e-12)) sol.price_at_bound = true;
  }
  sol.duality_gap_flag = sol.duality_gap() > schedule.tol_gap * std::max(1.0, dual_bound);
  return sol;
}

void write_dual_history(std::ostream& out, const RelaxedSolution& sol) {
  const std::size_t L = sol.caps.size();
  out << "k,dual,primal";
  for (std::size_t l = 0; l < L; ++l) out << ",mu_" << l;
  for (std::size_t l = 0; l < L; ++l) out << ",usage_" << l;
  for (std::size_t l = 0; l < L; ++l) out << ",slack_" << l;
  out << '\n';
  const auto old_precision = out.precision(12);
  for (const auto& it : sol.history) {
    out << it.k << ',' << it.dual_value << ',' << it.primal_estimate;
    for (double m : it.mu) out << ',' << m;
    for (double u : it.usage) out << ',' << u;
    for (std::size_t l = 0; l < L; ++l) out << ',' << sol.caps[l] - it.usage[l];
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace timely
