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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "timely/csma.hpp"
#include "timely/network.hpp"
#include "timely/packet_dp.hpp"
#include "timely/rng.hpp"

namespace timely {

/// Scale N (subchannels and arrival multiplier), horizon and root seed.
struct ScaleConfig {
  int subchannels = 1;
  std::int64_t horizon = 1000;
  std::uint64_t seed = 1;
};

struct Packet {
  std::uint64_t id = 0;
  int flow = 0;
  std::int64_t birth = 0;
  NodeId node = 0;
  int age = 0;
  /// Scratch slot owned by the running policy (e.g. a chosen next hop).
  LinkId route = kIdle;
};

struct Transmission {
  std::size_t packet = 0;  ///< index into SlotView::packets
  LinkId link = kIdle;
};

struct TransmissionOutcome {
  int flow = 0;
  NodeId from = 0;
  int age = 0;  ///< age when the attempt was made
  LinkId link = kIdle;
  bool success = false;
  NodeId landed = 0;
  bool delivered = false;
};

/// Read-only view of the network state a policy sees in one slot.
struct SlotView {
  const NetworkSpec& net;
  std::span<const FlowSpec> flows;
  int deadline;
  int subchannels;
  std::int64_t slot;
  std::uint64_t seed;
  std::span<const Packet> packets;
};

/// Pluggable per-slot decision interface shared by the truncated policy, the
/// Q-CSMA baseline and the online learner. Slot order is fixed: arrivals,
/// channel access, scheduling, outcomes, aging.
class SlotPolicy {
 public:
  virtual ~SlotPolicy() = default;

  virtual void on_arrival(const SlotView&, Packet&, Stream&) {}
  /// Called after a successful hop that did not deliver the packet.
  virtual void on_move(const SlotView&, Packet&, Stream&) {}
  virtual void access(const SlotView& view, ChannelGrant& grant) = 0;
  /// Appends at most one transmission per packet; the engine truncates (and
  /// counts a contract violation) anything beyond granted capacity.
  virtual void schedule(const SlotView& view, const ChannelGrant& grant, Stream& rng,
                        std::vector<Transmission>& out) = 0;
  virtual void observe(const SlotView&, const ChannelGrant&, std::span<const Transmission>,
                       std::span<const TransmissionOutcome>) {}
};

struct SimOptions {
  /// When false, links may carry more packets than granted (learning phase).
  bool enforce_capacity = true;
  bool record_trace = false;
  /// Relaxed optimum per unit scale, used for the reported gap.
  std::optional<double> relaxed_optimum;
  /// Called after every slot with the slot index and the live packets.
  std::function<void(std::int64_t, std::span<const Packet>)> on_slot_end;
};

struct FlowReport {
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t expired = 0;
  std::int64_t live = 0;
  double timely_throughput = 0.0;     ///< delivered / horizon
  double normalized_throughput = 0.0;  ///< divided by N
};

struct LinkReport {
  double grant_mean = 0.0;
  double grant_mad = 0.0;
  double usage_mean = 0.0;  ///< bandwidth actually used per slot
  double usage_mad = 0.0;
  std::int64_t transmissions = 0;
  std::int64_t successes = 0;
};

struct TraceRow {
  std::int64_t slot = 0;
  LinkId link = 0;
  int grants = 0;
  int transmissions = 0;
  int successes = 0;
};

struct SimReport {
  int subchannels = 1;
  std::int64_t horizon = 0;
  int deadline = 1;
  std::uint64_t seed = 0;
  std::vector<FlowReport> flows;
  std::vector<LinkReport> links;
  double objective = 0.0;             ///< sum_f weight_f * timely throughput
  double normalized_objective = 0.0;  ///< objective / N
  std::optional<double> relaxed_optimum;
  std::optional<double> gap;          ///< (OPT - normalized objective) / OPT
  std::int64_t truncated = 0;         ///< requests dropped by the policy's own truncation
  std::int64_t contract_violations = 0;
  std::vector<TraceRow> trace;
};

/// Runs the slot loop to the horizon with `policy` deciding access and scheduling.
SimReport run_policy(const NetworkSpec& net, std::span<const FlowSpec> flows, SlotPolicy& policy,
                     const ScaleConfig& scale, int deadline, const SimOptions& options = {});

/// The truncated relaxed-optimal policy: every packet follows its flow's
/// (randomized) (node, age) policy; per-link requests beyond the CSMA-r grant
/// are cut to capacity, smallest slack first, ties by packet id.
class TruncatedPolicy final : public SlotPolicy {
 public:
  TruncatedPolicy(std::vector<MixedPacketPolicy> policies, AggressionVector r);

  void access(const SlotView& view, ChannelGrant& grant) override;
  void schedule(const SlotView& view, const ChannelGrant& grant, Stream& rng,
                std::vector<Transmission>& out) override;

  std::int64_t truncated() const noexcept { return truncated_; }

 private:
  std::vector<MixedPacketPolicy> policies_;
  AggressionVector r_;
  std::vector<std::vector<std::size_t>> requests_;
  std::int64_t truncated_ = 0;
};

/// Never transmits; used as a degenerate reference.
class IdlePolicy final : public SlotPolicy {
 public:
  void access(const SlotView& view, ChannelGrant& grant) override;
  void schedule(const SlotView&, const ChannelGrant&, Stream&, std::vector<Transmission>&) override {}
};

/// Sort key for deadline-first selection: smaller slack first, then id.
inline bool earlier_deadline(const Packet& a, const Packet& b) noexcept {
  return a.age != b.age ? a.age > b.age : a.id < b.id;
}

SimReport run_truncated_policy(const NetworkSpec& net, std::span<const FlowSpec> flows,
                               std::span<const MixedPacketPolicy> policies,
                               const AggressionVector& r, const ScaleConfig& scale, int deadline,
                               const SimOptions& options = {});
SimReport run_truncated_policy(const NetworkSpec& net, std::span<const FlowSpec> flows,
                               std::span<const PacketPolicy> policies, const AggressionVector& r,
                               const ScaleConfig& scale, int deadline,
                               const SimOptions& options = {});

/// One row per flow plus a summary row.
void write_report(std::ostream& out, const SimReport& report);
/// One row per link: grant and usage mean/MAD.
void write_link_report(std::ostream& out, const SimReport& report);
void write_trace(std::ostream& out, const SimReport& report);

}  // namespace timely
