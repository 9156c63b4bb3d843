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

#include "timely/csma_tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "timely/rng.hpp"

namespace timely {

std::vector<double> csma_caps(const NetworkSpec& net, const AggressionVector& r) {
  return access_probabilities(net, r);
}

std::vector<double> aggression_gradient(const NetworkSpec& net, const AggressionVector& r,
                                        std::span<const double> shadow_prices) {
  const std::size_t L = net.num_links();
  if (r.size() != L || shadow_prices.size() != L) throw std::invalid_argument("size mismatch");
  std::vector<double> cumulative(L);
  for (std::size_t l = 0; l < L; ++l) cumulative[l] = cumulative_aggression(net, r, static_cast<LinkId>(l));

  std::vector<double> g(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    const double R = cumulative[l];
    g[l] = (R - r.r[l]) * shadow_prices[l] / (R * R);
    for (LinkId k : net.neighbors(static_cast<LinkId>(l))) {
      const auto kk = static_cast<std::size_t>(k);
      g[l] -= shadow_prices[kk] * r.r[kk] / (cumulative[kk] * cumulative[kk]);
    }
  }
  return g;
}

std::vector<double> project_gradient_to_box(std::span<const double> gradient,
                                            const AggressionVector& r, double r_min, double r_max) {
  std::vector<double> pg(gradient.begin(), gradient.end());
  for (std::size_t l = 0; l < pg.size(); ++l) {
    if (r.r[l] <= r_min && pg[l] < 0.0) pg[l] = 0.0;
    if (r.r[l] >= r_max && pg[l] > 0.0) pg[l] = 0.0;
  }
  return pg;
}

namespace {

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TunerState tune_aggression(const NetworkSpec& net, std::span<const FlowSpec> flows, int deadline,
                           const TunerSchedule& schedule, std::optional<AggressionVector> initial) {
  const std::size_t L = net.num_links();
  AggressionVector r = initial.value_or(AggressionVector(L, 1.0));
  if (r.size() != L) throw std::invalid_argument("initial aggression size mismatch");
  for (double& x : r.r) x = std::clamp(x, schedule.r_min, schedule.r_max);

  TunerState state;
  DualSchedule dual = schedule.dual;
  std::vector<std::vector<double>> projected;  // per-iterate projected gradients
  std::vector<double> steps;
  int small_moves = 0;
  double previous_objective = 0.0;

  for (int k = 1; k <= schedule.max_iters; ++k) {
    const auto caps = csma_caps(net, r);
    auto sol = solve_relaxed(net, flows, caps, deadline, dual);
    dual.initial_prices = sol.prices_last;

    const auto g = aggression_gradient(net, r, sol.prices_star.mu);
    auto pg = project_gradient_to_box(g, r, schedule.r_min, schedule.r_max);
    const double step = schedule.g0 / std::pow(static_cast<double>(k), schedule.exponent);

    if (k > 1 && step < schedule.monotone_step_threshold && sol.objective < previous_objective - 1e-3) {
      ++state.nonmonotone_steps;
    }
    previous_objective = sol.objective;

    if (schedule.record_trace) {
      state.trace.push_back({k, r.r, caps, sol.objective, sup_norm(pg)});
    }

    state.r = r;
    state.iterations = k;
    state.caps = caps;
    state.shadow_prices = sol.prices_star.mu;
    state.objective = sol.objective;
    state.last_grad_norm = sup_norm(pg);
    state.solution = std::move(sol);
    projected.push_back(pg);
    steps.push_back(step);

    // Step-weighted mean of the projected gradients over the trailing half.
    const std::size_t from = projected.size() / 2;
    std::vector<double> mean(L, 0.0);
    double weight = 0.0;
    for (std::size_t i = from; i < projected.size(); ++i) {
      weight += steps[i];
      for (std::size_t l = 0; l < L; ++l) mean[l] += steps[i] * projected[i][l];
    }
    for (double& x : mean) x /= weight;
    state.stationarity = sup_norm(mean);

    double moved = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double next = std::clamp(r.r[l] + step * g[l], schedule.r_min, schedule.r_max);
      moved = std::max(moved, std::abs(next - r.r[l]));
      r.r[l] = next;
    }
    small_moves = moved < schedule.tol_dr ? small_moves + 1 : 0;

    if (k >= schedule.min_iters && small_moves >= schedule.window &&
        state.stationarity <= schedule.tol_grad) {
      state.converged = true;
      break;
    }
  }
  return state;
}

TunerState tune_aggression_multistart(const NetworkSpec& net, std::span<const FlowSpec> flows,
                                      int deadline, const TunerSchedule& schedule, int starts,
                                      std::uint64_t seed) {
  if (starts < 1) throw std::invalid_argument("need at least one start");
  std::optional<TunerState> best;
  for (int s = 0; s < starts; ++s) {
    AggressionVector r0(net.num_links(), 1.0);
    if (s > 0) {
      auto rng = open_stream(seed, StreamTag::kPolicy, 0x7475u, static_cast<std::uint64_t>(s));
      for (double& x : r0.r) x = std::exp((rng.uniform() * 2.0 - 1.0) * std::log(4.0));
    }
    auto state = tune_aggression(net, flows, deadline, schedule, r0);
    if (!best || state.objective > best->objective + 1e-9 ||
        (!best->converged && state.converged && state.objective >= best->objective - 1e-9)) {
      best = std::move(state);
    }
  }
  return std::move(*best);
}

void write_tuner_trace(std::ostream& out, const TunerState& state) {
  const std::size_t L = state.r.size();
  out << "k,F,grad_norm";
  for (std::size_t l = 0; l < L; ++l) out << ",r_" << l;
  for (std::size_t l = 0; l < L; ++l) out << ",p_" << l;
  out << '\n';
  const auto old_precision = out.precision(12);
  for (const auto& it : state.trace) {
    out << it.k << ',' << it.objective << ',' << it.grad_norm;
    for (double x : it.r) out << ',' << x;
    for (double x : it.p) out << ',' << x;
    out << '\n';
  }
  out.precision(old_precision);
}

std::vector<double> project_to_simplex(std::span<const double> v, double total) {
  if (total < 0.0) throw std::invalid_argument("simplex total must be >= 0");
  std::vector<double> x(v.size(), 0.0);
  if (v.empty() || total == 0.0) return x;
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - total) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = std::max(v[i] - theta, 0.0);
  return x;
}

std::vector<double> allocation_gradient(const IndependentSetFamily& family,
                                        std::span<const double> shadow_prices) {
  std::vector<double> g(family.sets.size(), 0.0);
  for (std::size_t m = 0; m < family.sets.size(); ++m) {
    for (LinkId l : family.sets[m]) g[m] += shadow_prices[static_cast<std::size_t>(l)];
  }
  return g;
}

std::vector<double> allocation_caps(const IndependentSetFamily& family, std::size_t links,
                                    std::span<const double> i_bar) {
  std::vector<double> caps(links, 0.0);
  for (std::size_t m = 0; m < family.sets.size(); ++m) {
    for (LinkId l : family.sets[m]) caps[static_cast<std::size_t>(l)] += i_bar[m];
  }
  return caps;
}

AllocationResult tune_allocation(const NetworkSpec& net, const IndependentSetFamily& family,
                                 std::span<const FlowSpec> flows, int deadline, double budget,
                                 const AllocationSchedule& schedule) {
  if (budget < 0.0) throw std::invalid_argument("budget must be >= 0");
  const std::size_t M = family.sets.size();
  if (M == 0) throw std::invalid_argument("empty independent set family");

  AllocationResult result;
  std::vector<double> i_bar(M, budget / static_cast<double>(M));
  DualSchedule dual = schedule.dual;

  for (int k = 1; k <= schedule.max_iters; ++k) {
    const auto caps = allocation_caps(family, net.num_links(), i_bar);
    const auto sol = solve_relaxed(net, flows, caps, deadline, dual);
    dual.initial_prices = sol.prices_last;
    result.objective_trace.push_back(sol.objective);
    result.objective = sol.objective;
    result.caps = caps;
    result.iterations = k;

    const auto g = allocation_gradient(family, sol.prices_star.mu);
    std::vector<double> moved(M);
    const double step = schedule.a0 / static_cast<double>(k);
    for (std::size_t m = 0; m < M; ++m) moved[m] = i_bar[m] + step * g[m];
    auto next = project_to_simplex(moved, budget);
    double change = 0.0;
    for (std::size_t m = 0; m < M; ++m) change = std::max(change, std::abs(next[m] - i_bar[m]));
    i_bar = std::move(next);
    if (change < schedule.tol) break;
  }
  result.allocation = AllocationVector{i_bar, budget};
  result.caps = allocation_caps(family, net.num_links(), i_bar);
  result.objective = solve_relaxed(net, flows, result.caps, deadline, dual).objective;
  return result;
}

}  // namespace timely
