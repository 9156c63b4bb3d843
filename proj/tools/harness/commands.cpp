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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>

#include "harness.hpp"
#include "timely/error.hpp"
#include "timely/qcsma.hpp"
#include "timely/sim.hpp"
#include "timely/stats.hpp"

namespace timely::harness {

using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes CSVs and JSON files under the output directory, each with a
/// `<file>.meta.json` sidecar.
class OutputWriter {
 public:
  OutputWriter(std::string command, const ExperimentConfig& config, const RunOptions& options,
               std::span<const std::uint64_t> seeds)
      : command_(std::move(command)),
        config_(config),
        dir_(options.out_dir.value_or(config.output_dir)),
        timestamp_(options.timestamp.value_or(utc_now())),
        seeds_(seeds.begin(), seeds.end()) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("--out", "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void csv(const std::string& name, const Table& table) { write(name, table.str(), table.rows()); }

  void json_file(const std::string& name, const json& j) { write(name, j.dump(2) + "\n", 0); }

  CommandResult result() const { return result_; }

 private:
  void write(const std::string& name, const std::string& body, std::size_t rows) {
    const auto path = dir_ / name;
    std::filesystem::create_directories(path.parent_path());
    put(path, body);
    json meta = {
        {"command", command_},
        {"file", name},
        {"rows", rows},
        {"content_sha1", git_blob_sha1(body)},
        {"network", config_.network_source},
        {"seeds", seeds_},
        {"config", config_.raw},
        {"timestamp", timestamp_},
    };
    const auto meta_path = dir_ / (name + ".meta.json");
    put(meta_path, meta.dump(2) + "\n");
    result_.files.push_back(path);
    result_.files.push_back(meta_path);
  }

  static void put(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << body;
    if (!out) throw Error("write failed for '" + path.string() + "'");
  }

  std::string command_;
  const ExperimentConfig& config_;
  std::filesystem::path dir_;
  std::string timestamp_;
  std::vector<std::uint64_t> seeds_;
  CommandResult result_;
};

/// Relaxed solution and aggressions for one deadline, shared by every scale.
struct Optimum {
  int deadline = 1;
  AggressionVector r;
  RelaxedSolution solution;
  std::optional<TunerState> tuned;
  /// Relaxed optimum per unit scale.
  double value = 0.0;
};

Optimum compute_optimum(const ExperimentConfig& config, int deadline) {
  Optimum opt;
  opt.deadline = deadline;
  if (config.aggression) {
    opt.r = AggressionVector(*config.aggression);
    opt.solution = solve_relaxed(config.network, config.flows, csma_caps(config.network, opt.r), deadline,
                                 config.dual);
    opt.value = opt.solution.objective;
    return opt;
  }
  TunerState st = config.tuner_starts > 1
                      ? tune_aggression_multistart(config.network, config.flows, deadline, config.tuner,
                                                   config.tuner_starts)
                      : tune_aggression(config.network, config.flows, deadline, config.tuner);
  opt.r = st.r;
  opt.solution = st.solution;
  opt.value = st.objective;
  opt.tuned = std::move(st);
  return opt;
}

/// One optimum per configured deadline, computed once and reused across scales.
std::map<int, Optimum> optimum_cache(const ExperimentConfig& config, std::span<const int> deadlines, int threads) {
  std::vector<Optimum> solved(deadlines.size());
  parallel_for(deadlines.size(), threads, [&](std::size_t i) { solved[i] = compute_optimum(config, deadlines[i]); });
  std::map<int, Optimum> cache;
  for (auto& o : solved) cache.emplace(o.deadline, std::move(o));
  return cache;
}

std::vector<int> distinct(std::vector<int> xs) {
  std::vector<int> out;
  for (int x : xs) {
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

struct RunKey {
  int deadline = 1;
  int scale = 1;
  std::uint64_t seed = 1;
  PolicyKind policy = PolicyKind::kOptimal;
};

LearnerConfig learner_config(const ExperimentConfig& config, int scale, std::uint64_t seed) {
  LearnerConfig lc = config.learner;
  lc.subchannels = scale;
  lc.seed = seed;
  return lc;
}

SimReport execute(const ExperimentConfig& config, const Optimum& opt, const RunKey& key, bool trace) {
  const ScaleConfig scale{key.scale, config.horizon, key.seed};
  SimOptions options;
  options.enforce_capacity = config.enforce_capacity;
  options.record_trace = trace;
  options.relaxed_optimum = opt.value;
  switch (key.policy) {
    case PolicyKind::kOptimal:
      return run_truncated_policy(config.network, config.flows,
                                  std::span<const MixedPacketPolicy>(opt.solution.mixed_policy), opt.r, scale,
                                  key.deadline, options);
    case PolicyKind::kQcsma:
      return run_qcsma_baseline(config.network, config.flows, scale, key.deadline, config.qcsma_window,
                                config.qcsma_carryover, options);
    case PolicyKind::kLearned: {
      auto learned = run_learning(config.network, config.flows, key.deadline,
                                  learner_config(config, key.scale, key.seed));
      SimReport rep = std::move(learned.evaluation);
      rep.relaxed_optimum = opt.value;
      if (opt.value > 0.0) rep.gap = (opt.value - rep.normalized_objective) / opt.value;
      return rep;
    }
  }
  throw std::logic_error("unknown policy");
}

double mean_grant_mad(const SimReport& rep) {
  std::vector<double> m;
  for (const auto& l : rep.links) m.push_back(l.grant_mad);
  return stats::mean(std::span<const double>(m));
}

double optional_or_nan(const std::optional<double>& x) { return x.value_or(std::nan("")); }

std::string trace_name(const RunKey& k) {
  return "traces/" + std::string(policy_name(k.policy)) + "_tau" + std::to_string(k.deadline) + "_N" +
         std::to_string(k.scale) + "_seed" + std::to_string(k.seed) + ".csv";
}

std::vector<std::uint64_t> effective_seeds(const ExperimentConfig& config, const RunOptions& options) {
  return options.seeds.value_or(config.seeds);
}

enum class Order { kDeadlineMajor, kScaleMajor };

/// Runs the grid deadline x scale x policy x seed and writes `<prefix>_runs`,
/// `<prefix>_flows`, optionally `<prefix>` aggregates, link reports and traces.
CommandResult run_grid(const std::string& command, const std::string& prefix, const ExperimentConfig& config,
                       const RunOptions& options, std::span<const PolicyKind> policies, Order order,
                       bool aggregate) {
  const auto seeds = effective_seeds(config, options);
  const auto deadlines = distinct(config.deadlines);
  const auto scales = distinct(config.scales);
  OutputWriter out(command, config, options, seeds);
  const auto cache = optimum_cache(config, deadlines, options.threads);

  std::vector<RunKey> keys;
  auto push = [&](int d, int n) {
    for (PolicyKind p : policies) {
      for (auto s : seeds) keys.push_back({d, n, s, p});
    }
  };
  if (order == Order::kDeadlineMajor) {
    for (int d : deadlines) for (int n : scales) push(d, n);
  } else {
    for (int n : scales) for (int d : deadlines) push(d, n);
  }

  std::vector<SimReport> reports(keys.size());
  parallel_for(keys.size(), options.threads, [&](std::size_t i) {
    reports[i] = execute(config, cache.at(keys[i].deadline), keys[i], options.verbose_trace);
  });

  Table runs({"deadline", "N", "seed", "policy", "horizon", "objective", "normalized_objective", "relaxed_opt",
              "gap", "truncated", "contract_violations", "grant_mad_mean"});
  Table flows({"deadline", "N", "seed", "policy", "flow", "arrivals", "delivered", "expired", "live",
               "timely_throughput", "normalized_throughput"});
  Table links({"deadline", "N", "seed", "policy", "link", "grant_mean", "grant_mad", "usage_mean", "usage_mad",
               "transmissions", "successes"});
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& k = keys[i];
    const auto& r = reports[i];
    const std::string pname(policy_name(k.policy));
    runs.row().add(k.deadline).add(k.scale).add(k.seed).add(pname).add(r.horizon).add(r.objective)
        .add(r.normalized_objective).add(optional_or_nan(r.relaxed_optimum)).add(optional_or_nan(r.gap))
        .add(r.truncated).add(r.contract_violations).add(mean_grant_mad(r));
    for (std::size_t f = 0; f < r.flows.size(); ++f) {
      const auto& fr = r.flows[f];
      flows.row().add(k.deadline).add(k.scale).add(k.seed).add(pname).add(f).add(fr.arrivals).add(fr.delivered)
          .add(fr.expired).add(fr.live).add(fr.timely_throughput).add(fr.normalized_throughput);
    }
    for (std::size_t l = 0; l < r.links.size(); ++l) {
      const auto& lr = r.links[l];
      links.row().add(k.deadline).add(k.scale).add(k.seed).add(pname).add(l).add(lr.grant_mean).add(lr.grant_mad)
          .add(lr.usage_mean).add(lr.usage_mad).add(lr.transmissions).add(lr.successes);
    }
  }
  out.csv(prefix + "_runs.csv", runs);
  out.csv(prefix + "_flows.csv", flows);
  out.csv(prefix + "_links.csv", links);

  if (aggregate) {
    Table agg({"deadline", "N", "policy", "seeds", "objective_mean", "objective_stderr", "normalized_mean",
               "normalized_stderr", "gap_mean", "gap_stderr", "relaxed_opt", "grant_mad_mean"});
    for (std::size_t i = 0; i < keys.size(); i += seeds.size()) {
      std::vector<double> obj, norm, gap, mad;
      for (std::size_t j = i; j < i + seeds.size(); ++j) {
        obj.push_back(reports[j].objective);
        norm.push_back(reports[j].normalized_objective);
        gap.push_back(optional_or_nan(reports[j].gap));
        mad.push_back(mean_grant_mad(reports[j]));
      }
      const auto& k = keys[i];
      agg.row().add(k.deadline).add(k.scale).add(policy_name(k.policy)).add(seeds.size())
          .add(stats::mean(std::span<const double>(obj))).add(stats::standard_error(obj))
          .add(stats::mean(std::span<const double>(norm))).add(stats::standard_error(norm))
          .add(stats::mean(std::span<const double>(gap))).add(stats::standard_error(gap))
          .add(cache.at(k.deadline).value).add(stats::mean(std::span<const double>(mad)));
    }
    out.csv(prefix + ".csv", agg);
  }

  if (options.verbose_trace) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      Table t({"slot", "link", "grants", "transmissions", "successes"});
      for (const auto& row : reports[i].trace) {
        t.row().add(row.slot).add(row.link).add(row.grants).add(row.transmissions).add(row.successes);
      }
      out.csv(trace_name(keys[i]), t);
    }
  }
  return out.result();
}

json policy_json(const NetworkSpec& net, const RelaxedSolution& sol) {
  json flows = json::array();
  for (std::size_t f = 0; f < sol.policy_star.size(); ++f) {
    const auto& pol = sol.policy_star[f];
    json states = json::array();
    for (std::size_t i = 0; i < pol.grid.num_nodes; ++i) {
      for (int a = 0; a < pol.grid.deadline; ++a) {
        const LinkId l = pol.action(static_cast<NodeId>(i), a);
        if (l == kIdle) continue;
        states.push_back({{"node", net.node_name(static_cast<NodeId>(i))}, {"age", a}, {"link", l}});
      }
    }
    flows.push_back({{"flow", f}, {"transmit", states}});
  }
  return flows;
}

}  // namespace

CommandResult cmd_solve_relaxed(const ExperimentConfig& config, const RunOptions& options) {
  const auto deadlines = distinct(config.deadlines);
  OutputWriter out("solve-relaxed", config, options, effective_seeds(config, options));
  const std::size_t L = config.network.num_links();

  struct Solved {
    int deadline = 1;
    std::vector<double> r;
    RelaxedSolution sol;
  };
  std::vector<Solved> solved(deadlines.size());
  parallel_for(deadlines.size(), options.threads, [&](std::size_t i) {
    Solved& s = solved[i];
    s.deadline = deadlines[i];
    if (config.caps) {
      s.sol = solve_relaxed(config.network, config.flows, *config.caps, s.deadline, config.dual);
      return;
    }
    auto opt = compute_optimum(config, s.deadline);
    s.r = opt.r.r;
    s.sol = std::move(opt.solution);
  });

  Table links({"deadline", "link", "src", "dst", "cap", "aggression", "mu_star", "mu_last", "usage", "slack"});
  Table summary({"deadline", "objective", "dual_bound", "duality_gap", "iterations", "converged",
                 "duality_gap_flag", "price_at_bound"});
  Table policy({"deadline", "flow", "node", "age", "action", "next_hop", "value"});
  json solutions = json::array();
  for (const auto& s : solved) {
    const auto& sol = s.sol;
    for (std::size_t l = 0; l < L; ++l) {
      const auto& link = config.network.link(static_cast<LinkId>(l));
      links.row().add(s.deadline).add(l).add(config.network.node_name(link.src))
          .add(config.network.node_name(link.dst)).add(sol.caps[l]).add(s.r.empty() ? std::nan("") : s.r[l])
          .add(sol.prices_star.mu[l]).add(sol.prices_last.mu[l]).add(sol.usage[l]).add(sol.slack[l]);
    }
    summary.row().add(s.deadline).add(sol.objective).add(sol.dual_bound).add(sol.duality_gap())
        .add(sol.iterations).add(sol.converged).add(sol.duality_gap_flag).add(sol.price_at_bound);
    for (std::size_t f = 0; f < sol.policy_star.size(); ++f) {
      const auto& pol = sol.policy_star[f];
      const auto& val = sol.values_star[f];
      for (std::size_t i = 0; i < pol.grid.num_nodes; ++i) {
        const auto node = static_cast<NodeId>(i);
        for (int a = 0; a <= pol.grid.deadline; ++a) {
          const LinkId act = pol.action(node, a);
          policy.row().add(s.deadline).add(f).add(config.network.node_name(node)).add(a)
              .add(act == kIdle ? std::string("idle") : "tx:" + std::to_string(act))
              .add(act == kIdle ? std::string() : config.network.node_name(config.network.link(act).dst))
              .add(val.at(node, a));
        }
      }
    }
    solutions.push_back({{"deadline", s.deadline},
                         {"objective", sol.objective},
                         {"dual_bound", sol.dual_bound},
                         {"mu_star", sol.prices_star.mu},
                         {"caps", sol.caps},
                         {"usage", sol.usage},
                         {"aggression", s.r},
                         {"iterations", sol.iterations},
                         {"converged", sol.converged},
                         {"duality_gap_flag", sol.duality_gap_flag},
                         {"price_at_bound", sol.price_at_bound},
                         {"policy", policy_json(config.network, sol)}});
  }
  out.csv("relaxed.csv", summary);
  out.csv("relaxed_links.csv", links);
  out.csv("relaxed_policy.csv", policy);
  out.json_file("solution.json", {{"solutions", solutions}});

  if (options.verbose_trace) {
    for (const auto& s : solved) {
      if (s.sol.history.empty()) continue;
      Table h({"k", "dual", "primal"});
      for (const auto& it : s.sol.history) h.row().add(it.k).add(it.dual_value).add(it.primal_estimate);
      out.csv("traces/dual_tau" + std::to_string(s.deadline) + ".csv", h);
    }
  }
  return out.result();
}

CommandResult cmd_tune_csma(const ExperimentConfig& config, const RunOptions& options) {
  const auto deadlines = distinct(config.deadlines);
  OutputWriter out("tune-csma", config, options, effective_seeds(config, options));
  std::vector<TunerState> tuned(deadlines.size());
  parallel_for(deadlines.size(), options.threads, [&](std::size_t i) {
    tuned[i] = config.tuner_starts > 1
                   ? tune_aggression_multistart(config.network, config.flows, deadlines[i], config.tuner,
                                                config.tuner_starts)
                   : tune_aggression(config.network, config.flows, deadlines[i], config.tuner,
                                     config.aggression ? std::optional(AggressionVector(*config.aggression))
                                                       : std::nullopt);
  });

  const std::size_t L = config.network.num_links();
  Table summary({"deadline", "objective", "iterations", "converged", "stationarity", "last_grad_norm",
                 "nonmonotone_steps"});
  Table links({"deadline", "link", "r", "access", "cap", "mu"});
  std::vector<std::string> header{"deadline", "k", "objective", "grad_norm"};
  for (std::size_t l = 0; l < L; ++l) header.push_back("r_" + std::to_string(l));
  for (std::size_t l = 0; l < L; ++l) header.push_back("p_" + std::to_string(l));
  Table trace(header);
  for (std::size_t i = 0; i < deadlines.size(); ++i) {
    const auto& st = tuned[i];
    summary.row().add(deadlines[i]).add(st.objective).add(st.iterations).add(st.converged).add(st.stationarity)
        .add(st.last_grad_norm).add(st.nonmonotone_steps);
    const auto p = access_probabilities(config.network, st.r);
    for (std::size_t l = 0; l < L; ++l) {
      links.row().add(deadlines[i]).add(l).add(st.r.r[l]).add(p[l]).add(st.caps[l]).add(st.shadow_prices[l]);
    }
    for (const auto& it : st.trace) {
      trace.row().add(deadlines[i]).add(it.k).add(it.objective).add(it.grad_norm);
      for (double x : it.r) trace.add(x);
      for (double x : it.p) trace.add(x);
    }
  }
  out.csv("tuned.csv", summary);
  out.csv("tuned_links.csv", links);
  out.csv("tuner_trace.csv", trace);
  return out.result();
}

CommandResult cmd_simulate(const ExperimentConfig& config, const RunOptions& options) {
  return run_grid("simulate", "simulate", config, options, config.policies, Order::kDeadlineMajor, false);
}

CommandResult cmd_sweep_scale(const ExperimentConfig& config, const RunOptions& options) {
  return run_grid("sweep-scale", "sweep_scale", config, options, config.policies, Order::kDeadlineMajor, true);
}

CommandResult cmd_sweep_deadline(const ExperimentConfig& config, const RunOptions& options) {
  return run_grid("sweep-deadline", "sweep_deadline", config, options, config.policies, Order::kScaleMajor, true);
}

CommandResult cmd_baseline(const ExperimentConfig& config, const RunOptions& options) {
  static constexpr PolicyKind kBaseline[] = {PolicyKind::kQcsma};
  return run_grid("baseline", "baseline", config, options, kBaseline, Order::kDeadlineMajor, false);
}

CommandResult cmd_learn_online(const ExperimentConfig& config, const RunOptions& options) {
  const auto seeds = effective_seeds(config, options);
  const auto deadlines = distinct(config.deadlines);
  const auto scales = distinct(config.scales);
  OutputWriter out("learn-online", config, options, seeds);
  const auto cache = optimum_cache(config, deadlines, options.threads);
  const std::size_t L = config.network.num_links();

  std::vector<RunKey> keys;
  for (int d : deadlines) {
    for (int n : scales) {
      for (auto s : seeds) keys.push_back({d, n, s, PolicyKind::kLearned});
    }
  }
  struct Outcome {
    LearningResult learned;
    SimReport offline;
    double learned_relaxed = 0.0;
  };
  std::vector<Outcome> outcomes(keys.size());
  parallel_for(keys.size(), options.threads, [&](std::size_t i) {
    const auto& k = keys[i];
    const auto& opt = cache.at(k.deadline);
    const auto lc = learner_config(config, k.scale, k.seed);
    auto& o = outcomes[i];
    o.learned = run_learning(config.network, config.flows, k.deadline, lc);
    const ScaleConfig eval{k.scale, lc.eval_horizon, o.learned.evaluation.seed};
    o.offline = run_truncated_policy(config.network, config.flows,
                                     std::span<const MixedPacketPolicy>(opt.solution.mixed_policy), opt.r, eval,
                                     k.deadline);
    o.learned_relaxed = solve_relaxed(config.network, config.flows,
                                      csma_caps(config.network, AggressionVector(o.learned.state.r)), k.deadline,
                                      config.dual)
                            .objective;
  });

  std::vector<std::string> header{"deadline", "N", "seed", "learned_normalized", "last_greedy_normalized",
                                  "offline_normalized", "ratio", "learning_phase_normalized", "converged",
                                  "policy_changes_in_tail", "relaxed_at_learned_r", "relaxed_at_tuned_r"};
  for (std::size_t l = 0; l < L; ++l) header.push_back("r_" + std::to_string(l));
  for (std::size_t l = 0; l < L; ++l) header.push_back("r_star_" + std::to_string(l));
  for (std::size_t l = 0; l < L; ++l) header.push_back("mu_" + std::to_string(l));
  for (std::size_t l = 0; l < L; ++l) header.push_back("mu_star_" + std::to_string(l));
  Table summary(header);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& k = keys[i];
    const auto& o = outcomes[i];
    const auto& opt = cache.at(k.deadline);
    const double offline = o.offline.normalized_objective;
    summary.row().add(k.deadline).add(k.scale).add(k.seed).add(o.learned.evaluation.normalized_objective)
        .add(o.learned.evaluation_last.normalized_objective).add(offline)
        .add(offline > 0.0 ? o.learned.evaluation.normalized_objective / offline : std::nan(""))
        .add(o.learned.learning_report.normalized_objective).add(o.learned.converged)
        .add(o.learned.policy_changes_in_tail).add(o.learned_relaxed).add(opt.value);
    for (double x : o.learned.state.r) summary.add(x);
    for (double x : opt.r.r) summary.add(x);
    for (double x : o.learned.state.mu) summary.add(x);
    for (double x : opt.solution.prices_star.mu) summary.add(x);

    std::vector<std::string> cols{"t", "running_throughput"};
    for (std::size_t f = 0; f < config.flows.size(); ++f) cols.push_back("qnorm_" + std::to_string(f));
    for (std::size_t l = 0; l < L; ++l) cols.push_back("mu_" + std::to_string(l));
    for (std::size_t l = 0; l < L; ++l) cols.push_back("r_" + std::to_string(l));
    Table t(cols);
    for (const auto& row : o.learned.trace) {
      t.row().add(row.t).add(row.running_throughput);
      for (double x : row.q_norm) t.add(x);
      for (double x : row.mu) t.add(x);
      for (double x : row.r) t.add(x);
    }
    out.csv("learn_trace_tau" + std::to_string(k.deadline) + "_N" + std::to_string(k.scale) + "_seed" +
                std::to_string(k.seed) + ".csv",
            t);
  }
  out.csv("learn_online.csv", summary);
  return out.result();
}

std::span<const CommandInfo> commands() {
  static const CommandInfo kCommands[] = {
      {"solve-relaxed", "Solve the bandwidth-constrained relaxation at configured or CSMA caps", &cmd_solve_relaxed},
      {"tune-csma", "Tune CSMA aggressions by gradient ascent on the relaxed optimum", &cmd_tune_csma},
      {"simulate", "Simulate the configured policies over deadlines, scales and seeds", &cmd_simulate},
      {"sweep-scale", "Scale sweep with per-point mean and standard error", &cmd_sweep_scale},
      {"sweep-deadline", "Deadline sweep with per-point mean and standard error", &cmd_sweep_deadline},
      {"learn-online", "Online three-timescale learning and frozen-policy evaluation", &cmd_learn_online},
      {"baseline", "Simulate the Q-CSMA / EDF shortest-path baseline", &cmd_baseline},
  };
  return kCommands;
}

}  // namespace timely::harness
