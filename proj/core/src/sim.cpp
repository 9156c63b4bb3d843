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

#include "timely/sim.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <stdexcept>

#include "timely/stats.hpp"

namespace timely {

namespace {

void check_inputs(const NetworkSpec& net, std::span<const FlowSpec> flows, const ScaleConfig& scale,
                  int deadline) {
  if (scale.subchannels < 1) throw std::invalid_argument("scale N must be >= 1");
  if (scale.horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  if (deadline < 1) throw std::invalid_argument("deadline must be >= 1");
  for (std::size_t f = 0; f < flows.size(); ++f) {
    net.validate_flow(flows[f], "flows[" + std::to_string(f) + "]");
  }
}

}  // namespace

SimReport run_policy(const NetworkSpec& net, std::span<const FlowSpec> flows, SlotPolicy& policy,
                     const ScaleConfig& scale, int deadline, const SimOptions& options) {
  check_inputs(net, flows, scale, deadline);
  const std::size_t L = net.num_links();
  const std::size_t F = flows.size();
  const int N = scale.subchannels;

  SimReport report;
  report.subchannels = N;
  report.horizon = scale.horizon;
  report.deadline = deadline;
  report.seed = scale.seed;
  report.flows.assign(F, {});
  report.links.assign(L, {});

  std::vector<Packet> packets;
  std::vector<Packet> survivors;
  std::vector<char> removed;
  std::vector<Transmission> tx;
  std::vector<Transmission> kept;
  std::vector<TransmissionOutcome> outcomes;
  std::vector<std::vector<std::size_t>> per_link(L);
  std::vector<int> used(L);
  std::vector<char> claimed;
  std::vector<int> successes(L);
  ChannelGrant grant;

  const auto T = static_cast<std::size_t>(scale.horizon);
  std::vector<std::vector<int>> grant_series(L, std::vector<int>(T));
  std::vector<std::vector<double>> usage_series(L, std::vector<double>(T));
  std::uint64_t next_id = 0;

  for (std::int64_t t = 0; t < scale.horizon; ++t) {
    auto policy_rng = open_stream(scale.seed, StreamTag::kPolicy, static_cast<std::uint64_t>(t));

    // Arrivals.
    auto arrivals = open_stream(scale.seed, StreamTag::kArrivals, static_cast<std::uint64_t>(t));
    const std::size_t first_new = packets.size();
    for (std::size_t f = 0; f < F; ++f) {
      std::binomial_distribution<int> draw(N, flows[f].arrival_rate);
      const int n = draw(arrivals);
      report.flows[f].arrivals += n;
      for (int k = 0; k < n; ++k) {
        packets.push_back({next_id++, static_cast<int>(f), t, flows[f].source, 0, kIdle});
      }
    }
    {
      const SlotView view{net, flows, deadline, N, t, scale.seed, packets};
      for (std::size_t i = first_new; i < packets.size(); ++i) policy.on_arrival(view, packets[i], policy_rng);
    }

    const SlotView view{net, flows, deadline, N, t, scale.seed, packets};

    // Channel access.
    grant.reset(t, N, L);
    policy.access(view, grant);
    if (grant.grants.size() != L) throw std::logic_error("policy returned a malformed grant");

    // Scheduling.
    tx.clear();
    policy.schedule(view, grant, policy_rng, tx);

    claimed.assign(packets.size(), 0);
    for (auto& v : per_link) v.clear();
    for (const auto& x : tx) {
      if (x.packet >= packets.size() || claimed[x.packet]) throw std::logic_error("invalid transmission");
      const auto& p = packets[x.packet];
      if (x.link < 0 || static_cast<std::size_t>(x.link) >= L || net.link(x.link).src != p.node) {
        throw std::logic_error("transmission on a link not leaving the packet's node");
      }
      claimed[x.packet] = 1;
      per_link[static_cast<std::size_t>(x.link)].push_back(x.packet);
    }

    kept.clear();
    for (std::size_t l = 0; l < L; ++l) {
      auto& reqs = per_link[l];
      const int capacity = grant.packet_capacity(net, static_cast<LinkId>(l));
      if (options.enforce_capacity && static_cast<int>(reqs.size()) > capacity) {
        ++report.contract_violations;
        std::sort(reqs.begin(), reqs.end(),
                  [&](std::size_t a, std::size_t b) { return earlier_deadline(packets[a], packets[b]); });
        reqs.resize(static_cast<std::size_t>(capacity));
      }
      used[l] = static_cast<int>(reqs.size());
      for (std::size_t i : reqs) kept.push_back({i, static_cast<LinkId>(l)});
    }
    std::sort(kept.begin(), kept.end(), [&](const Transmission& a, const Transmission& b) {
      return packets[a.packet].id < packets[b.packet].id;
    });

    // Outcomes.
    auto outcome_rng = open_stream(scale.seed, StreamTag::kOutcomes, static_cast<std::uint64_t>(t));
    outcomes.clear();
    removed.assign(packets.size(), 0);
    std::fill(successes.begin(), successes.end(), 0);
    for (const auto& x : kept) {
      auto& p = packets[x.packet];
      const auto& link = net.link(x.link);
      TransmissionOutcome o{p.flow, p.node, p.age, x.link, false, p.node, false};
      if (outcome_rng.bernoulli(link.reliability)) {
        o.success = true;
        o.landed = link.dst;
        ++successes[static_cast<std::size_t>(x.link)];
        p.node = link.dst;
        if (p.node == flows[static_cast<std::size_t>(p.flow)].destination) {
          o.delivered = true;
          removed[x.packet] = 1;
          ++report.flows[static_cast<std::size_t>(p.flow)].delivered;
        } else {
          policy.on_move(view, p, policy_rng);
        }
      }
      outcomes.push_back(o);
    }
    policy.observe(view, grant, kept, outcomes);

    for (std::size_t l = 0; l < L; ++l) {
      const auto tl = static_cast<std::size_t>(t);
      grant_series[l][tl] = grant.grants[l];
      usage_series[l][tl] = static_cast<double>(used[l]) / net.link(static_cast<LinkId>(l)).rate;
      report.links[l].transmissions += used[l];
      report.links[l].successes += successes[l];
      if (options.record_trace) {
        report.trace.push_back({t, static_cast<LinkId>(l), grant.grants[l], used[l], successes[l]});
      }
    }

    // Aging and expiry.
    survivors.clear();
    for (std::size_t i = 0; i < packets.size(); ++i) {
      if (removed[i]) continue;
      Packet p = packets[i];
      if (++p.age >= deadline) {
        ++report.flows[static_cast<std::size_t>(p.flow)].expired;
        continue;
      }
      survivors.push_back(p);
    }
    packets.swap(survivors);
    if (options.on_slot_end) options.on_slot_end(t, packets);
  }

  for (const auto& p : packets) ++report.flows[static_cast<std::size_t>(p.flow)].live;

  const double horizon = scale.horizon > 0 ? static_cast<double>(scale.horizon) : 1.0;
  for (std::size_t f = 0; f < F; ++f) {
    auto& fr = report.flows[f];
    fr.timely_throughput = static_cast<double>(fr.delivered) / horizon;
    fr.normalized_throughput = fr.timely_throughput / N;
    report.objective += flows[f].weight * fr.timely_throughput;
  }
  report.normalized_objective = report.objective / N;
  for (std::size_t l = 0; l < L; ++l) {
    auto& lr = report.links[l];
    lr.grant_mean = stats::mean<int>(grant_series[l]);
    lr.grant_mad = stats::mad<int>(grant_series[l]);
    lr.usage_mean = stats::mean<double>(usage_series[l]);
    lr.usage_mad = stats::mad<double>(usage_series[l]);
  }
  if (options.relaxed_optimum) {
    report.relaxed_optimum = options.relaxed_optimum;
    if (*options.relaxed_optimum > 0.0) {
      report.gap = (*options.relaxed_optimum - report.normalized_objective) / *options.relaxed_optimum;
    }
  }
  return report;
}

TruncatedPolicy::TruncatedPolicy(std::vector<MixedPacketPolicy> policies, AggressionVector r)
    : policies_(std::move(policies)), r_(std::move(r)) {}

void TruncatedPolicy::access(const SlotView& view, ChannelGrant& grant) {
  sample_slot_into(view.net, r_, view.subchannels, view.seed, view.slot, grant);
}

void TruncatedPolicy::schedule(const SlotView& view, const ChannelGrant& grant, Stream& rng,
                               std::vector<Transmission>& out) {
  const std::size_t L = view.net.num_links();
  requests_.resize(L);
  for (auto& v : requests_) v.clear();
  for (std::size_t i = 0; i < view.packets.size(); ++i) {
    const auto& p = view.packets[i];
    const LinkId a = policies_[static_cast<std::size_t>(p.flow)].sample(p.node, p.age, rng.uniform());
    if (a != kIdle) requests_[static_cast<std::size_t>(a)].push_back(i);
  }
  for (std::size_t l = 0; l < L; ++l) {
    auto& reqs = requests_[l];
    const auto capacity = static_cast<std::size_t>(grant.packet_capacity(view.net, static_cast<LinkId>(l)));
    if (reqs.size() > capacity) {
      truncated_ += static_cast<std::int64_t>(reqs.size() - capacity);
      std::sort(reqs.begin(), reqs.end(), [&](std::size_t a, std::size_t b) {
        return earlier_deadline(view.packets[a], view.packets[b]);
      });
      reqs.resize(capacity);
    }
    for (std::size_t i : reqs) out.push_back({i, static_cast<LinkId>(l)});
  }
}

void IdlePolicy::access(const SlotView&, ChannelGrant&) {}

SimReport run_truncated_policy(const NetworkSpec& net, std::span<const FlowSpec> flows,
                               std::span<const MixedPacketPolicy> policies,
                               const AggressionVector& r, const ScaleConfig& scale, int deadline,
                               const SimOptions& options) {
  if (policies.size() != flows.size()) throw std::invalid_argument("one policy per flow required");
  if (r.size() != net.num_links()) throw std::invalid_argument("aggression vector size mismatch");
  for (const auto& p : policies) {
    if (p.grid.deadline != deadline || p.grid.num_nodes != net.num_nodes()) {
      throw std::invalid_argument("policy grid does not match network and deadline");
    }
  }
  TruncatedPolicy policy({policies.begin(), policies.end()}, r);
  auto report = run_policy(net, flows, policy, scale, deadline, options);
  report.truncated = policy.truncated();
  return report;
}

SimReport run_truncated_policy(const NetworkSpec& net, std::span<const FlowSpec> flows,
                               std::span<const PacketPolicy> policies, const AggressionVector& r,
                               const ScaleConfig& scale, int deadline, const SimOptions& options) {
  std::vector<MixedPacketPolicy> mixed;
  mixed.reserve(policies.size());
  for (const auto& p : policies) mixed.push_back(MixedPacketPolicy::from(p));
  return run_truncated_policy(net, flows, std::span<const MixedPacketPolicy>(mixed), r, scale,
                              deadline, options);
}

void write_report(std::ostream& out, const SimReport& report) {
  const auto old_precision = out.precision(10);
  out << "row,N,horizon,deadline,seed,flow,arrivals,delivered,expired,live,timely_throughput,"
         "normalized_throughput,objective,normalized_objective,relaxed_opt,gap,truncated,"
         "contract_violations\n";
  for (std::size_t f = 0; f < report.flows.size(); ++f) {
    const auto& fr = report.flows[f];
    out << "flow," << report.subchannels << ',' << report.horizon << ',' << report.deadline << ','
        << report.seed << ',' << f << ',' << fr.arrivals << ',' << fr.delivered << ','
        << fr.expired << ',' << fr.live << ',' << fr.timely_throughput << ','
        << fr.normalized_throughput << ",,,,,,\n";
  }
  std::int64_t arrivals = 0, delivered = 0, expired = 0, live = 0;
  for (const auto& fr : report.flows) {
    arrivals += fr.arrivals;
    delivered += fr.delivered;
    expired += fr.expired;
    live += fr.live;
  }
  out << "summary," << report.subchannels << ',' << report.horizon << ',' << report.deadline << ','
      << report.seed << ",all," << arrivals << ',' << delivered << ',' << expired << ',' << live
      << ",,," << report.objective << ',' << report.normalized_objective << ',';
  if (report.relaxed_optimum) out << *report.relaxed_optimum;
  out << ',';
  if (report.gap) out << *report.gap;
  out << ',' << report.truncated << ',' << report.contract_violations << '\n';
  out.precision(old_precision);
}

void write_link_report(std::ostream& out, const SimReport& report) {
  const auto old_precision = out.precision(10);
  out << "N,seed,link,grant_mean,grant_mad,usage_mean,usage_mad,transmissions,successes\n";
  for (std::size_t l = 0; l < report.links.size(); ++l) {
    const auto& lr = report.links[l];
    out << report.subchannels << ',' << report.seed << ',' << l << ',' << lr.grant_mean << ','
        << lr.grant_mad << ',' << lr.usage_mean << ',' << lr.usage_mad << ',' << lr.transmissions
        << ',' << lr.successes << '\n';
  }
  out.precision(old_precision);
}

void write_trace(std::ostream& out, const SimReport& report) {
  out << "slot,link,grants,transmissions,successes\n";
  for (const auto& row : report.trace) {
    out << row.slot << ',' << row.link << ',' << row.grants << ',' << row.transmissions << ','
        << row.successes << '\n';
  }
}

}  // namespace timely
