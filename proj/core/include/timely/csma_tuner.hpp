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
#include <optional>
#include <span>
#include <vector>

#include "timely/csma.hpp"
#include "timely/dual_solver.hpp"
#include "timely/network.hpp"

namespace timely {

/// Bandwidth caps induced by CSMA-r: cap_l = p(l; r), in bandwidth units
/// (the same units as the dual solver's link usage).
std::vector<double> csma_caps(const NetworkSpec& net, const AggressionVector& r);

/// dF/dr_l = mu_l (R_l - r_l) / R_l^2 - sum_{k in N(l)} mu_k r_k / R_k^2.
std::vector<double> aggression_gradient(const NetworkSpec& net, const AggressionVector& r,
                                        std::span<const double> shadow_prices);

/// Zeroes gradient components that point out of the box at active bounds.
std::vector<double> project_gradient_to_box(std::span<const double> gradient,
                                            const AggressionVector& r, double r_min, double r_max);

struct TunerSchedule {
  /// Step k (1-based) is g0 / k^exponent.
  double g0 = 20.0;
  double exponent = 0.8;
  int max_iters = 5000;
  int min_iters = 20;
  double r_min = 1e-3;
  double r_max = 1e3;
  /// Local convergence: |dr|_inf < tol_dr over `window` iterates and the
  /// step-weighted mean projected gradient over the trailing half of the
  /// run has sup-norm <= tol_grad.
  double tol_dr = 1e-4;
  int window = 10;
  double tol_grad = 1e-3;
  /// Steps below this size make F non-monotonicity worth flagging.
  double monotone_step_threshold = 0.05;
  DualSchedule dual = dual_schedule_with_iters(5000);
  bool record_trace = true;
};

struct TunerIterate {
  int k = 0;
  std::vector<double> r;
  std::vector<double> p;
  double objective = 0.0;
  double grad_norm = 0.0;
};

struct TunerState {
  AggressionVector r;
  int iterations = 0;
  bool converged = false;
  /// Sup-norm of the last iterate's projected gradient.
  double last_grad_norm = 0.0;
  /// Sup-norm of the step-weighted mean projected gradient (tail half).
  double stationarity = 0.0;
  /// F at the final r and its dual solution.
  double objective = 0.0;
  std::vector<double> caps;
  std::vector<double> shadow_prices;
  RelaxedSolution solution;
  /// Count of small-step iterations where F dropped by more than 1e-3.
  int nonmonotone_steps = 0;
  std::vector<TunerIterate> trace;
};

/// Projected gradient ascent on F(r) = f(p(r)). Returns the best iterate
/// reached with `converged` false when max_iters runs out.
TunerState tune_aggression(const NetworkSpec& net, std::span<const FlowSpec> flows, int deadline,
                           const TunerSchedule& schedule = {},
                           std::optional<AggressionVector> initial = std::nullopt);

/// Runs `starts` independent tunings (the first from r = 1, the rest from
/// log-uniform draws in [1/4, 4]) and keeps the one with the largest F.
TunerState tune_aggression_multistart(const NetworkSpec& net, std::span<const FlowSpec> flows,
                                      int deadline, const TunerSchedule& schedule = {},
                                      int starts = 4, std::uint64_t seed = 1);

/// CSV rows `k,F,grad_norm,r_l...,p_l...`.
void write_tuner_trace(std::ostream& out, const TunerState& state);

/// Euclidean projection of v onto {x >= 0, sum x = total}.
std::vector<double> project_to_simplex(std::span<const double> v, double total);

/// Budget-K bandwidth split over the maximal independent sets.
struct AllocationVector {
  std::vector<double> i_bar;
  double budget = 0.0;
};

/// df/dI_m = sum of the shadow prices of the links in set m.
std::vector<double> allocation_gradient(const IndependentSetFamily& family,
                                        std::span<const double> shadow_prices);

/// cap_l = sum over sets containing l of I_m (bandwidth units).
std::vector<double> allocation_caps(const IndependentSetFamily& family, std::size_t links,
                                    std::span<const double> i_bar);

struct AllocationSchedule {
  /// Step k (1-based) is a0 / k.
  double a0 = 0.5;
  int max_iters = 300;
  double tol = 1e-6;
  DualSchedule dual = dual_schedule_with_iters(3000);
};

struct AllocationResult {
  AllocationVector allocation;
  std::vector<double> caps;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;
};

/// Projected gradient ascent of f(caps(I)) over the scaled simplex. Throws
/// GraphTooLarge through enumeration when the family was not built.
AllocationResult tune_allocation(const NetworkSpec& net, const IndependentSetFamily& family,
                                 std::span<const FlowSpec> flows, int deadline, double budget,
                                 const AllocationSchedule& schedule = {});

}  // namespace timely
