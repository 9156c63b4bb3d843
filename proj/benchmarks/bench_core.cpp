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

#include <benchmark/benchmark.h>

#include "timely/csma.hpp"
#include "timely/csma_tuner.hpp"
#include "timely/dual_solver.hpp"
#include "timely/packet_dp.hpp"
#include "timely/sim.hpp"

namespace {

using namespace timely;

// Four nodes, five links, two flows into node 3.
NetworkSpec diamond() {
  return build_interference_from_node_sharing(NetworkSpec(
      {"1", "2", "3", "4"}, {{0, 1, 0.5, 1}, {0, 2, 0.5, 1}, {1, 2, 0.5, 1}, {1, 3, 0.5, 1}, {2, 3, 0.5, 1}}));
}

const std::vector<FlowSpec> kFlows{{0, 3, 1.0, 0.8}, {1, 3, 1.0, 0.8}};

void BM_PacketDp(benchmark::State& state) {
  const auto net = diamond();
  const int tau = static_cast<int>(state.range(0));
  const PriceVector mu(std::vector<double>{0.1, 0.2, 0.05, 0.3, 0.1});
  for (auto _ : state) benchmark::DoNotOptimize(solve_single_packet_dp(net, kFlows[0], 0, mu, tau));
}
BENCHMARK(BM_PacketDp)->Arg(4)->Arg(10)->Arg(40);

void BM_EvaluateDual(benchmark::State& state) {
  const auto net = diamond();
  const std::vector<double> caps(5, 0.3);
  const PriceVector mu(5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_dual(net, kFlows, mu, 10, caps));
}
BENCHMARK(BM_EvaluateDual);

void BM_SampleSlot(benchmark::State& state) {
  const auto net = diamond();
  const AggressionVector r(5, 1.0);
  const int n = static_cast<int>(state.range(0));
  ChannelGrant g;
  std::int64_t t = 0;
  for (auto _ : state) {
    sample_slot_into(net, r, n, 1, t++, g);
    benchmark::DoNotOptimize(g.grants.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SampleSlot)->Arg(1)->Arg(16)->Arg(256);

void BM_TruncatedSlots(benchmark::State& state) {
  const auto net = diamond();
  const int n = static_cast<int>(state.range(0));
  const auto sol = solve_relaxed(net, kFlows, csma_caps(net, AggressionVector(5, 1.0)), 10);
  const std::int64_t horizon = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_truncated_policy(net, kFlows, std::span<const MixedPacketPolicy>(sol.mixed_policy),
                                                  AggressionVector(5, 1.0), {n, horizon, 1}, 10));
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_TruncatedSlots)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
