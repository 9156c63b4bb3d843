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

// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "harness/harness.hpp"
#include "oracles.hpp"
#include "timely/csma.hpp"
#include "timely/csma_tuner.hpp"
#include "timely/dual_solver.hpp"
#include "timely/learner.hpp"
#include "timely/packet_dp.hpp"
#include "timely/qcsma.hpp"
#include "timely/sim.hpp"
#include "timely/stats.hpp"

using namespace timely;
namespace h = timely::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

h::ExperimentConfig config(const std::string& name) { return h::load_config(fs::path(TIMELY_CONFIG_DIR) / name); }

double mean(const std::vector<double>& x) { return stats::mean<double>(x); }
double stderr_of(const std::vector<double>& x) { return stats::standard_error(x); }

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Stream rng(1);
  double worst = 0.0;
  double policies = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int nodes = 2 + static_cast<int>(rng.below(3));
    const int tau = 1 + static_cast<int>(rng.below(4));
    const auto inst = oracle::random_instance(rng, nodes, 3);
    PriceVector mu(inst.net.num_links());
    for (auto& m : mu.mu) m = rng.bernoulli(0.2) ? 0.0 : 1.5 * rng.uniform();
    const auto dp = solve_single_packet_dp(inst.net, inst.flow, 0, mu, tau);
    const auto best = oracle::exhaustive_values(inst.net, inst.flow, mu, tau);
    policies += oracle::policy_count(inst.net, inst.flow, tau);
    for (std::size_t i = 0; i < best.size(); ++i) worst = std::max(worst, std::abs(best[i] - dp.values.values[i]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          fmt("100 instances, %.0f policies enumerated, max |V - V_enum| = %.3g, %.2f s", policies, worst, secs), {}};
}

// Follows pi*(mu) for every packet with unlimited bandwidth and tallies
// deliveries and per-link bandwidth in consecutive batches of slots.
class FollowPolicy final : public SlotPolicy {
 public:
  FollowPolicy(const PacketPolicy& p, std::size_t links, std::int64_t batch_len, int batches)
      : policy_(p), batch_len_(batch_len), delivered_(batches, 0.0), usage_(links, std::vector<double>(batches, 0.0)) {}

  void access(const SlotView&, ChannelGrant&) override {}
  void schedule(const SlotView& view, const ChannelGrant&, Stream&, std::vector<Transmission>& out) override {
    for (std::size_t i = 0; i < view.packets.size(); ++i) {
      const LinkId a = policy_.action(view.packets[i].node, view.packets[i].age);
      if (a != kIdle) out.push_back({i, a});
    }
  }
  void observe(const SlotView& view, const ChannelGrant&, std::span<const Transmission>,
               std::span<const TransmissionOutcome> outcomes) override {
    const auto b = static_cast<std::size_t>(view.slot / batch_len_);
    for (const auto& o : outcomes) {
      usage_[static_cast<std::size_t>(o.link)][b] += 1.0 / view.net.link(o.link).rate;
      if (o.delivered) delivered_[b] += 1.0;
    }
  }

  std::vector<double> delivered_rates() const { return scaled(delivered_); }
  std::vector<double> usage_rates(std::size_t l) const { return scaled(usage_[l]); }

 private:
  std::vector<double> scaled(std::vector<double> v) const {
    for (double& x : v) x /= static_cast<double>(batch_len_);
    return v;
  }
  PacketPolicy policy_;
  std::int64_t batch_len_;
  std::vector<double> delivered_;
  std::vector<std::vector<double>> usage_;
};

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Stream rng(2);
  int checks = 0, misses = 0;
  double worst_z = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int nodes = 3 + static_cast<int>(rng.below(3));
    const int tau = 2 + static_cast<int>(rng.below(5));
    auto inst = oracle::random_instance(rng, nodes, 2);
    PriceVector mu(inst.net.num_links());
    for (auto& m : mu.mu) m = 0.3 * rng.uniform();
    const auto dp = solve_single_packet_dp(inst.net, inst.flow, 0, mu, tau);
    const auto occ = compute_occupancy(inst.net, inst.flow, dp.policy);

    constexpr int batches = 100;
    const auto batch_len = static_cast<std::int64_t>(std::ceil(1e5 / inst.flow.arrival_rate / batches));
    FollowPolicy follow(dp.policy, inst.net.num_links(), batch_len, batches);
    SimOptions opt;
    opt.enforce_capacity = false;
    const std::vector<FlowSpec> flows{inst.flow};
    run_policy(inst.net, flows, follow, {1, batch_len * batches, 1000 + static_cast<std::uint64_t>(k)}, tau, opt);

    auto check = [&](const std::vector<double>& series, double exact) {
      ++checks;
      const double m = mean(series);
      const double se = stderr_of(series);
      if (se == 0.0) {
        if (std::abs(m - exact) > 1e-12) ++misses;
        return;
      }
      const double z = std::abs(m - exact) / se;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++misses;
    };
    check(follow.delivered_rates(), occ.delivered);
    for (std::size_t l = 0; l < inst.net.num_links(); ++l) check(follow.usage_rates(l), occ.link_usage[l]);
  }
  const double secs = seconds_since(t0);
  return {misses == 0 && secs < 60.0,
          fmt("20 instances, %d comparisons, %d beyond 3 SE (max z = %.2f), %.1f s", checks, misses, worst_z, secs), {}};
}

Outcome criterion3() {
  Outcome out;
  const auto net = NetworkSpec({"s", "d"}, {{0, 1, 1.0, 1}});
  const std::vector<FlowSpec> flows{{0, 1, 1.0, 0.8}};
  const std::vector<double> caps{0.5};
  DualSchedule s;
  s.record_history = true;
  const auto sol = solve_relaxed(net, flows, caps, 1, s);
  const bool band = sol.usage[0] >= 0.49 && sol.usage[0] <= 0.51 && sol.objective >= 0.49 && sol.objective <= 0.51;

  // weak duality on every iterate of every instance
  std::vector<std::tuple<std::string, NetworkSpec, std::vector<FlowSpec>, std::vector<double>, int>> cases;
  cases.emplace_back("single-link", net, flows, caps, 1);
  for (const char* name : {"fig3_sweep_scale.json", "fig4_sweep_scale.json"}) {
    const auto c = config(name);
    cases.emplace_back(name, c.network, c.flows, csma_caps(c.network, AggressionVector(c.network.num_links(), 1.0)),
                       c.deadlines.front());
  }
  Stream rng(3);
  for (int k = 0; k < 10; ++k) {
    const auto inst = oracle::random_instance(rng, 4, 2);
    std::vector<double> c(inst.net.num_links());
    for (auto& x : c) x = 0.05 + 0.5 * rng.uniform();
    cases.emplace_back("random", inst.net, std::vector<FlowSpec>{inst.flow}, c, 2 + static_cast<int>(rng.below(4)));
  }
  std::int64_t iterates = 0, violations = 0;
  for (const auto& [name, n, f, c, tau] : cases) {
    const auto r = solve_relaxed(n, f, c, tau, s);
    for (const auto& it : r.history) {
      ++iterates;
      if (it.dual_value < it.primal_estimate - 1e-12) ++violations;
    }
    if (r.dual_bound < r.objective - 1e-12) ++violations;
  }
  out.pass = band && violations == 0;
  out.detail = fmt("single link usage %.4f objective %.4f; weak duality violated at %lld of %lld iterates on %zu instances",
                   sol.usage[0], sol.objective, static_cast<long long>(violations), static_cast<long long>(iterates),
                   cases.size());
  return out;
}

Outcome criterion4() {
  Outcome out;
  Stream rng(4);
  const int draws = 100000;
  int misses = 0, checks = 0;
  double worst_z = 0.0;
  for (int n = 2; n <= 5; ++n) {
    std::vector<std::string> names;
    std::vector<LinkSpec> links;
    std::vector<InterferenceEdge> edges;
    for (int i = 0; i < n; ++i) {
      names.push_back("a" + std::to_string(i));
      names.push_back("b" + std::to_string(i));
      links.push_back({2 * i, 2 * i + 1, 1.0, 1});
      for (int j = 0; j < i; ++j) edges.emplace_back(j, i);
    }
    const NetworkSpec net(names, links, edges);
    AggressionVector r(static_cast<std::size_t>(n));
    for (auto& x : r.r) x = std::exp(std::log(10.0) * (2 * rng.uniform() - 1));
    const auto p = access_probabilities(net, r);
    std::vector<double> wins(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t t = 0; t < draws; ++t) {
      const auto g = sample_slot(net, r, 1, 40 + static_cast<std::uint64_t>(n), t);
      for (int l = 0; l < n; ++l) wins[static_cast<std::size_t>(l)] += g.grants[static_cast<std::size_t>(l)];
    }
    for (int l = 0; l < n; ++l) {
      const double pl = p[static_cast<std::size_t>(l)];
      const double z = std::abs(wins[static_cast<std::size_t>(l)] / draws - pl) / std::sqrt(pl * (1 - pl) / draws);
      worst_z = std::max(worst_z, z);
      ++checks;
      if (z > 3.0) ++misses;
    }
  }
  out.pass = misses == 0;
  out.detail = fmt("complete graphs 2-5 links: %d of %d links beyond 3 sigma (max z = %.2f) at %d draws", misses, checks,
                   worst_z, draws);

  const auto fig4 = config("fig4_sweep_scale.json").network;
  const AggressionVector r(fig4.num_links(), 1.0);
  const auto p = access_probabilities(fig4, r);
  std::vector<double> wins(fig4.num_links(), 0.0);
  for (std::int64_t t = 0; t < draws; ++t) {
    const auto g = sample_slot(fig4, r, 1, 44, t);
    for (std::size_t l = 0; l < wins.size(); ++l) wins[l] += g.grants[l];
  }
  std::string row;
  double worst = 0.0;
  for (std::size_t l = 0; l < wins.size(); ++l) {
    const double f = wins[l] / draws;
    worst = std::max(worst, std::abs(f - p[l]));
    row += fmt(" l%zu %.4f/%.4f", l, f, p[l]);
  }
  out.notes.push_back(fmt("fig4 graph, r = 1, measured/formula:%s; max deviation %.4f", row.c_str(), worst));
  return out;
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto net = config("fig4_sweep_scale.json").network;
  const AggressionVector r(net.num_links(), 1.0);
  const std::vector<double> scales{4, 16, 64, 256};
  const std::int64_t slots = 20000;
  std::vector<std::vector<double>> mads(net.num_links());
  ChannelGrant g;
  for (double n : scales) {
    std::vector<std::vector<int>> series(net.num_links(), std::vector<int>(slots));
    for (std::int64_t t = 0; t < slots; ++t) {
      sample_slot_into(net, r, static_cast<int>(n), 5, t, g);
      for (std::size_t l = 0; l < net.num_links(); ++l) series[l][static_cast<std::size_t>(t)] = g.grants[l];
    }
    for (std::size_t l = 0; l < net.num_links(); ++l) mads[l].push_back(stats::mad<int>(series[l]));
  }
  bool ok = true;
  std::string row;
  for (std::size_t l = 0; l < mads.size(); ++l) {
    const double slope = stats::loglog_slope(scales, mads[l]);
    ok = ok && slope >= 0.4 && slope <= 0.6;
    row += fmt(" l%zu %.3f", l, slope);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 120.0, fmt("fig4 per-link MAD slopes over N = 4..256:%s, %.1f s", row.c_str(), secs), {}};
}

struct Point {
  std::vector<double> normalized;
  std::vector<double> gap;
};

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  out.pass = true;
  std::string summary;
  for (const char* name : {"fig3_sweep_scale.json", "fig4_sweep_scale.json"}) {
    const auto c = config(name);
    const int tau = 10;
    const auto st = tune_aggression(c.network, c.flows, tau, c.tuner);
    const double opt = st.objective;
    std::map<int, Point> points;
    double peak = 0.0;
    for (int n : {1, 2, 4, 8, 16}) {
      for (std::uint64_t seed : {1, 2, 3}) {
        SimOptions so;
        so.relaxed_optimum = opt;
        const auto rep = run_truncated_policy(c.network, c.flows, std::span<const MixedPacketPolicy>(st.solution.mixed_policy),
                                              st.r, {n, 50000, seed}, tau, so);
        points[n].normalized.push_back(rep.normalized_objective);
        points[n].gap.push_back(*rep.gap);
        peak = std::max(peak, rep.normalized_objective);
      }
    }
    bool monotone = true;
    std::string gaps;
    const Point* prev = nullptr;
    for (const auto& [n, pt] : points) {
      gaps += fmt(" N%d %.4f+-%.4f", n, mean(pt.gap), stderr_of(pt.gap));
      if (prev) {
        const double slack = 2.0 * std::hypot(stderr_of(prev->gap), stderr_of(pt.gap));
        if (mean(pt.gap) > mean(prev->gap) + slack) monotone = false;
      }
      prev = &pt;
    }
    const double n16 = mean(points[16].normalized);
    const bool close = std::abs(n16 - opt) <= 0.15 * opt;
    const bool bounded = std::string(name).find("fig3") == std::string::npos || peak <= 1.6;
    out.pass = out.pass && monotone && close && bounded;
    const std::string label = std::string(name).substr(0, 4);
    summary += fmt("%s OPT %.4f, N=16 %.4f (%.1f%% off), peak %.4f, gap non-increasing %s; ", label.c_str(), opt, n16,
                   100.0 * std::abs(n16 - opt) / opt, peak, monotone ? "yes" : "no");
    out.notes.push_back(label + " gaps:" + gaps);
  }
  const double secs = seconds_since(t0);
  out.pass = out.pass && secs < 600.0;
  out.detail = summary + fmt("%.0f s", secs);
  return out;
}

struct Sweep {
  int strict = 0;
  int points = 0;
  bool dominates = true;
  std::string rows;
};

Sweep deadline_sweep(const h::ExperimentConfig& c, int n, const std::vector<std::uint64_t>& seeds) {
  Sweep s;
  for (int tau : c.deadlines) {
    const auto st = tune_aggression(c.network, c.flows, tau, c.tuner);
    std::vector<double> opt, base;
    for (auto seed : seeds) {
      const ScaleConfig scale{n, c.horizon, seed};
      opt.push_back(run_truncated_policy(c.network, c.flows, std::span<const MixedPacketPolicy>(st.solution.mixed_policy),
                                         st.r, scale, tau)
                        .normalized_objective);
      base.push_back(run_qcsma_baseline(c.network, c.flows, scale, tau, c.qcsma_window, c.qcsma_carryover)
                         .normalized_objective);
    }
    const double diff = mean(opt) - mean(base);
    const double se = std::hypot(stderr_of(opt), stderr_of(base));
    ++s.points;
    if (diff < 0.0) s.dominates = false;
    if (diff > 2.0 * se) ++s.strict;
    s.rows += fmt(" t%d %.3f/%.3f", tau, mean(opt), mean(base));
  }
  return s;
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  const auto c = config("fig3_sweep_deadline.json");
  const auto s = deadline_sweep(c, 4, c.seeds);
  const double secs = seconds_since(t0);
  out.pass = s.dominates && 2 * s.strict >= s.points && secs < 600.0;
  out.detail = fmt("fig3 N=4, %zu seeds: optimal >= baseline at every deadline %s, strict at %d of %d, %.0f s",
                   c.seeds.size(), s.dominates ? "yes" : "no", s.strict, s.points, secs);
  out.notes.push_back("fig3 optimal/baseline:" + s.rows);

  auto c4 = config("fig4_sweep_scale.json");
  c4.deadlines = {2, 4, 6, 8, 10, 12};
  c4.horizon = 20000;
  const auto s4 = deadline_sweep(c4, 4, {1});
  out.notes.push_back(fmt("fig4 (1 seed, informational) optimal/baseline:%s", s4.rows.c_str()));
  return out;
}

Outcome criterion8() {
  Outcome out;
  out.pass = true;
  std::string summary;
  for (const char* name : {"fig3_sweep_scale.json", "fig4_sweep_scale.json"}) {
    const auto c = config(name);
    const auto st = tune_aggression(c.network, c.flows, c.deadlines.front(), c.tuner);
    out.pass = out.pass && st.stationarity <= 1e-3;
    summary += fmt("%s stationarity %.3g (last iterate %.3g, %d iterations, F %.4f); ", std::string(name).substr(0, 4).c_str(),
                   st.stationarity, st.last_grad_norm, st.iterations, st.objective);
  }
  const NetworkSpec two({"a", "b", "c", "d"}, {{0, 1, 1.0, 1}, {2, 3, 1.0, 1}}, {{0, 1}});
  const std::vector<FlowSpec> flows{{0, 1, 1.0, 0.5}, {2, 3, 1.0, 0.5}};
  const auto st = tune_aggression(two, flows, 1, {}, AggressionVector(std::vector<double>{0.5, 2.0}));
  const bool even = std::abs(st.caps[0] - 0.5) <= 0.02 && std::abs(st.caps[1] - 0.5) <= 0.02;
  out.pass = out.pass && even;
  out.detail = summary + fmt("symmetric pair p = (%.4f, %.4f)", st.caps[0], st.caps[1]);
  return out;
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = config("line3_learn.json");
  const int tau = c.deadlines.front();
  const int n = c.scales.front();
  const auto st = tune_aggression(c.network, c.flows, tau, c.tuner);
  std::vector<double> ratios;
  std::string row;
  for (auto seed : c.seeds) {
    LearnerConfig lc = c.learner;
    lc.subchannels = n;
    lc.seed = seed;
    const auto learned = run_learning(c.network, c.flows, tau, lc);
    const ScaleConfig eval{n, lc.eval_horizon, learned.evaluation.seed};
    const auto offline = run_truncated_policy(c.network, c.flows, std::span<const MixedPacketPolicy>(st.solution.mixed_policy),
                                              st.r, eval, tau);
    const double ratio = learned.evaluation.normalized_objective / offline.normalized_objective;
    ratios.push_back(ratio);
    row += fmt(" %.3f", ratio);
  }
  const double med = stats::median(ratios);
  const double secs = seconds_since(t0);
  return {med >= 0.9 && secs < 300.0,
          fmt("line3 N=%d tau=%d: learned/offline per seed%s, median %.3f, %.0f s", n, tau, row.c_str(), med, secs), {}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> csv_bodies(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

Outcome criterion10() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / ("timely_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const json cfg = {
      {"network", (fs::path(TIMELY_CONFIG_DIR) / "networks/fig4.json").string()},
      {"flows", json::array({{{"source", "1"}, {"destination", "4"}, {"arrival_rate", 0.8}},
                             {{"source", "2"}, {"destination", "4"}, {"arrival_rate", 0.8}}})},
      {"deadline", {3, 5}},
      {"scale", {1, 2}},
      {"horizon", 2000},
      {"seeds", {1, 2}},
      {"policies", {"optimal", "qcsma-edf-sp", "learned"}},
      {"tuner", {{"max_iters", 200}, {"dual", {{"max_iters", 1500}}}}},
      {"learner", {{"horizon", 3000}, {"eval_horizon", 2000}}},
  };
  const fs::path cfg_path = root / "small.json";
  std::ofstream(cfg_path) << cfg.dump(2);

  const std::vector<std::string> commands{"solve-relaxed", "tune-csma", "simulate", "sweep-scale",
                                          "sweep-deadline", "learn-online", "baseline"};
  struct Run {
    std::string label;
    int threads;
  };
  const std::vector<Run> runs{{"a", 1}, {"b", 1}, {"c", 3}};
  int compared = 0, differing = 0, failed = 0;
  std::string diffs;
  for (const auto& cmd : commands) {
    std::map<std::string, std::map<std::string, std::string>> bodies;
    for (const auto& run : runs) {
      const fs::path out = root / cmd / run.label;
      const std::string line = fmt("'%s' %s --config '%s' --out '%s' --threads %d --verbose-trace > /dev/null", TIMELY_CLI_PATH,
                                   cmd.c_str(), cfg_path.c_str(), out.c_str(), run.threads);
      if (std::system(line.c_str()) != 0) {
        ++failed;
        continue;
      }
      bodies[run.label] = csv_bodies(out);
    }
    if (bodies.size() != runs.size() || bodies["a"].empty()) continue;
    for (const auto& run : runs) {
      if (run.label == "a") continue;
      const auto& other = bodies[run.label];
      if (other.size() != bodies["a"].size()) ++differing;
      for (const auto& [file, body] : bodies["a"]) {
        ++compared;
        const auto it = other.find(file);
        if (it == other.end() || it->second != body) {
          ++differing;
          diffs += " " + cmd + "/" + file;
        }
      }
    }
  }
  fs::remove_all(root);
  const double secs = seconds_since(t0);
  Outcome out;
  out.pass = failed == 0 && differing == 0 && compared > 0;
  out.detail = fmt("7 commands x 3 runs (1, 1 and 3 threads): %d CSV comparisons, %d differing, %d failed runs, %.0f s",
                   compared, differing, failed, secs);
  if (!diffs.empty()) out.notes.push_back("differing:" + diffs);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    for (const auto& note : o.notes) std::cout << "  info criterion " << id << ": " << note << '\n';
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
