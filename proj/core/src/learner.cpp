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

#include "timely/learner.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "timely/dual_solver.hpp"

namespace timely {

LearnerState::LearnerState(const NetworkSpec& net, std::span<const FlowSpec> flows, int deadline,
                           const LearnerConfig& config)
    : num_nodes(net.num_nodes()), num_links(net.num_links()) {
  if (deadline < 1) throw std::invalid_argument("deadline must be >= 1");
  age_cap = config.age_cap == 0 ? deadline : config.age_cap;
  if (age_cap < 1 || age_cap > deadline) throw std::invalid_argument("age cap must lie in [1, deadline]");
  mu_max = config.mu_max.value_or(default_mu_max(net, flows, deadline));
  double best_weight = 0.0;
  for (const auto& f : flows) best_weight = std::max(best_weight, f.weight);
  q_min = -mu_max * deadline;
  q_max = best_weight;
  const std::size_t cells = num_nodes * static_cast<std::size_t>(age_cap + 1) * num_links;
  q.assign(flows.size(), std::vector<double>(cells, 0.0));
  visits.assign(flows.size(), std::vector<std::int64_t>(cells, 0));
  mu = config.initial_prices.value_or(std::vector<double>(num_links, 0.0));
  r = config.initial_aggression.value_or(std::vector<double>(num_links, 1.0));
  if (mu.size() != num_links || r.size() != num_links) throw std::invalid_argument("initial vector size mismatch");
  for (double& x : mu) x = std::clamp(x, 0.0, mu_max);
  for (double& x : r) x = std::clamp(x, config.r_min, config.r_max);
  access_estimate = access_probabilities(net, AggressionVector(r));
}

double& LearnerState::at(int flow, NodeId node, int age, LinkId link) {
  return q[static_cast<std::size_t>(flow)][cell(node, age, link)];
}

double LearnerState::at(int flow, NodeId node, int age, LinkId link) const {
  return const_cast<LearnerState*>(this)->at(flow, node, age, link);
}

double LearnerState::value(const NetworkSpec& net, int flow, NodeId node, int age) const {
  double v = 0.0;
  for (int a = age; a < age_cap; ++a) {
    for (LinkId l : net.out_links(node)) v = std::max(v, at(flow, node, a, l));
  }
  return v;
}

LinkId LearnerState::greedy(const NetworkSpec& net, int flow, NodeId node, int age) const {
  if (age >= age_cap) return kIdle;
  double best = value(net, flow, node, age + 1);
  LinkId choice = kIdle;
  for (LinkId l : net.out_links(node)) {
    const double qv = at(flow, node, age, l);
    if (qv > best) {
      best = qv;
      choice = l;
    }
  }
  return choice;
}

void learner_step(LearnerState& state, const NetworkSpec& net, std::span<const FlowSpec> flows,
                  std::span<const LearnerTransition> transitions, std::span<const double> usage,
                  std::span<const double> access, const StepSizes& steps,
                  const LearnerConfig& config) {
  const std::size_t L = net.num_links();
  if (usage.size() != L || access.size() != L) throw std::invalid_argument("per-link measurement size mismatch");

  for (const auto& tr : transitions) {
    if (tr.age >= state.age_cap) continue;
    const auto& flow = flows[static_cast<std::size_t>(tr.flow)];
    const auto& link = net.link(tr.link);
    double target = -state.mu[static_cast<std::size_t>(tr.link)] / link.rate;
    const NodeId next = tr.success ? tr.landed : tr.node;
    if (next == flow.destination) {
      target += flow.weight;
    } else {
      target += state.value(net, tr.flow, next, std::min(tr.age + 1, state.age_cap));
    }
    const std::size_t c = state.cell(tr.node, tr.age, tr.link);
    const auto n = ++state.visits[static_cast<std::size_t>(tr.flow)][c];
    const double alpha = config.per_entry_alpha ? config.steps.alpha(n) : steps.alpha;
    double& qv = state.q[static_cast<std::size_t>(tr.flow)][c];
    qv = std::clamp((1.0 - alpha) * qv + alpha * target, state.q_min, state.q_max);
  }

  const double kappa = config.access_smoothing;
  for (std::size_t l = 0; l < L; ++l) {
    state.access_estimate[l] = (1.0 - kappa) * state.access_estimate[l] + kappa * access[l];
  }
  const std::vector<double> mu_now = state.mu;
  if (config.learn_prices) {
    for (std::size_t l = 0; l < L; ++l) {
      state.mu[l] = std::clamp(state.mu[l] + steps.beta * (usage[l] - access[l]), 0.0, state.mu_max);
    }
  }
  if (config.learn_aggression) {
    for (std::size_t l = 0; l < L; ++l) {
      const double c = state.access_estimate[l];
      state.r[l] = std::clamp(state.r[l] + steps.gamma * mu_now[l] * (c - c * c), config.r_min, config.r_max);
    }
  }
  ++state.t;
}

std::vector<PacketPolicy> extract_greedy_policy(const LearnerState& state, const NetworkSpec& net,
                                                std::span<const FlowSpec> flows, int deadline) {
  std::vector<PacketPolicy> out;
  for (std::size_t f = 0; f < flows.size(); ++f) {
    PacketPolicy p;
    p.flow = static_cast<int>(f);
    p.grid = StateGrid{net.num_nodes(), deadline};
    p.actions.assign(p.grid.size(), kIdle);
    for (std::size_t i = 0; i < net.num_nodes(); ++i) {
      const auto node = static_cast<NodeId>(i);
      if (node == flows[f].destination) continue;
      for (int a = 0; a < deadline; ++a) p.actions[p.grid.at(node, a)] = state.greedy(net, static_cast<int>(f), node, a);
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

class LearnerPolicy final : public SlotPolicy {
 public:
  LearnerPolicy(LearnerState& state, const LearnerConfig& config, std::span<const FlowSpec> flows)
      : state_(state), config_(config), weights_(flows.size()) {
    for (std::size_t f = 0; f < flows.size(); ++f) weights_[f] = flows[f].weight;
  }

  void access(const SlotView& view, ChannelGrant& grant) override {
    sample_slot_into(view.net, AggressionVector(state_.r), view.subchannels, view.seed, view.slot, grant);
  }

  void schedule(const SlotView& view, const ChannelGrant&, Stream& rng,
                std::vector<Transmission>& out) override {
    const auto t = static_cast<double>(view.slot + 1);
    const double eps = std::max(config_.epsilon_floor, 1.0 / t);
    for (std::size_t i = 0; i < view.packets.size(); ++i) {
      const auto& p = view.packets[i];
      LinkId a = kIdle;
      if (rng.uniform() < eps) {
        const auto links = view.net.out_links(p.node);
        const auto pick = rng.below(links.size() + 1);
        if (pick > 0) a = links[pick - 1];
      } else {
        a = state_.greedy(view.net, p.flow, p.node, p.age);
      }
      if (a != kIdle) out.push_back({i, a});
    }
  }

  void observe(const SlotView& view, const ChannelGrant& grant, std::span<const Transmission>,
               std::span<const TransmissionOutcome> outcomes) override {
    const std::size_t L = view.net.num_links();
    transitions_.clear();
    usage_.assign(L, 0.0);
    access_.assign(L, 0.0);
    const double N = view.subchannels;
    for (const auto& o : outcomes) {
      transitions_.push_back({o.flow, o.from, o.age, o.link, o.success, o.landed});
      usage_[static_cast<std::size_t>(o.link)] += 1.0 / (view.net.link(o.link).rate * N);
      if (o.delivered) delivered_weight_ += weights_[static_cast<std::size_t>(o.flow)];
    }
    for (std::size_t l = 0; l < L; ++l) access_[l] = grant.grants[l] / N;
    const std::int64_t t = view.slot + 1;
    const StepSizes steps{config_.steps.alpha(t), config_.steps.beta(t), config_.steps.gamma(t)};
    learner_step(state_, view.net, view.flows, transitions_, usage_, access_, steps, config_);
  }

  double delivered_weight() const noexcept { return delivered_weight_; }

 private:
  LearnerState& state_;
  const LearnerConfig& config_;
  std::vector<double> weights_;
  std::vector<LearnerTransition> transitions_;
  std::vector<double> usage_;
  std::vector<double> access_;
  double delivered_weight_ = 0.0;
};

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

LearningResult run_learning(const NetworkSpec& net, std::span<const FlowSpec> flows, int deadline,
                            const LearnerConfig& config) {
  if (config.horizon < 1) throw std::invalid_argument("learning horizon must be >= 1");
  LearningResult result;
  result.state = LearnerState(net, flows, deadline, config);
  LearnerPolicy policy(result.state, config, flows);

  const std::int64_t every = std::max<std::int64_t>(1, config.trace_every);
  const std::int64_t tail_start = config.horizon - config.horizon / 10;
  const std::int64_t tail_every = std::max<std::int64_t>(1, config.horizon / 100);
  std::optional<std::vector<PacketPolicy>> tail_reference;
  const std::size_t A = net.num_links() + 1;
  const StateGrid grid{net.num_nodes(), deadline};
  std::vector<std::vector<std::int64_t>> tail_counts(flows.size(), std::vector<std::int64_t>(grid.size() * A, 0));

  SimOptions options;
  options.enforce_capacity = false;
  options.on_slot_end = [&](std::int64_t slot, std::span<const Packet>) {
    const std::int64_t done = slot + 1;
    if (done % every == 0 || done == config.horizon) {
      LearnerTraceRow row;
      row.t = done;
      for (const auto& qf : result.state.q) row.q_norm.push_back(max_abs(qf));
      row.mu = result.state.mu;
      row.r = result.state.r;
      row.running_throughput = policy.delivered_weight() / static_cast<double>(done);
      result.trace.push_back(std::move(row));
    }
    if (done > tail_start) {
      for (std::size_t f = 0; f < flows.size(); ++f) {
        for (std::size_t i = 0; i < net.num_nodes(); ++i) {
          const auto node = static_cast<NodeId>(i);
          if (node == flows[f].destination) continue;
          for (int a = 0; a < deadline; ++a) {
            const LinkId g = result.state.greedy(net, static_cast<int>(f), node, a);
            ++tail_counts[f][grid.at(node, a) * A + static_cast<std::size_t>(g + 1)];
          }
        }
      }
    }
    if (done >= tail_start && ((done - tail_start) % tail_every == 0 || done == config.horizon)) {
      auto greedy = extract_greedy_policy(result.state, net, flows, deadline);
      if (tail_reference && !(greedy == *tail_reference)) {
        ++result.policy_changes_in_tail;
        result.converged = false;
      }
      tail_reference = std::move(greedy);
    }
  };
  ScaleConfig scale{config.subchannels, config.horizon, config.seed};
  result.learning_report = run_policy(net, flows, policy, scale, deadline, options);

  result.greedy_policy = extract_greedy_policy(result.state, net, flows, deadline);
  for (std::size_t f = 0; f < flows.size(); ++f) {
    auto mixed = MixedPacketPolicy::from(result.greedy_policy[f]);
    for (std::size_t s = 0; s < grid.size(); ++s) {
      std::int64_t total = 0;
      for (std::size_t k = 0; k < A; ++k) total += tail_counts[f][s * A + k];
      if (total == 0) continue;
      auto& choice = mixed.choices[s];
      choice.clear();
      for (std::size_t k = 0; k < A; ++k) {
        const auto n = tail_counts[f][s * A + k];
        if (n > 0) choice.emplace_back(static_cast<LinkId>(k) - 1, static_cast<double>(n) / static_cast<double>(total));
      }
    }
    result.tail_policy.push_back(std::move(mixed));
  }
  const AggressionVector r(result.state.r);
  ScaleConfig eval{config.subchannels, config.eval_horizon, derive_seed(config.seed, {0x6576616cULL})};
  result.evaluation = run_truncated_policy(net, flows, std::span<const MixedPacketPolicy>(result.tail_policy),
                                           r, eval, deadline);
  result.evaluation_last = run_truncated_policy(net, flows, std::span<const PacketPolicy>(result.greedy_policy),
                                                r, eval, deadline);
  return result;
}

void write_learner_trace(std::ostream& out, const LearningResult& result) {
  const auto& s = result.state;
  out << "t,running_throughput";
  for (std::size_t f = 0; f < s.q.size(); ++f) out << ",qnorm_" << f;
  for (std::size_t l = 0; l < s.num_links; ++l) out << ",mu_" << l;
  for (std::size_t l = 0; l < s.num_links; ++l) out << ",r_" << l;
  out << '\n';
  const auto old_precision = out.precision(10);
  for (const auto& row : result.trace) {
    out << row.t << ',' << row.running_throughput;
    for (double x : row.q_norm) out << ',' << x;
    for (double x : row.mu) out << ',' << x;
    for (double x : row.r) out << ',' << x;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace timely
