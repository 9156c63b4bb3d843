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
#include <charconv>
#include <fstream>
#include <set>

#include "harness.hpp"
#include "timely/error.hpp"

namespace timely::harness {

using nlohmann::json;

namespace {

std::string join(const std::string& field, const std::string& key) {
  return field.empty() ? key : field + "." + key;
}

std::string index(const std::string& field, std::size_t i) {
  return field + "[" + std::to_string(i) + "]";
}

void reject_unknown(const json& j, const std::string& field, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(join(field, key), "unknown key");
    }
  }
}

const json& require(const json& j, const std::string& key, const std::string& field) {
  if (!j.contains(key)) throw ConfigError(join(field, key), "missing");
  return j.at(key);
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return j.get<std::int64_t>();
}

bool as_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) throw ConfigError(field, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

template <class T, class Parse>
std::vector<T> scalar_or_list(const json& j, const std::string& field, Parse parse) {
  std::vector<T> out;
  if (j.is_array()) {
    if (j.empty()) throw ConfigError(field, "list must not be empty");
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse(j[i], index(field, i)));
  } else {
    out.push_back(parse(j, field));
  }
  return out;
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], index(field, i)));
  return out;
}

NodeId node_ref(const json& j, const std::vector<std::string>& names, const std::string& field) {
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0 || static_cast<std::size_t>(v) >= names.size()) throw ConfigError(field, "node index out of range");
    return static_cast<NodeId>(v);
  }
  const std::string name = as_string(j, field);
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError(field, "unknown node '" + name + "'");
  return static_cast<NodeId>(it - names.begin());
}

void read_dual(const json& j, const std::string& field, DualSchedule& s) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  reject_unknown(j, field, {"a0", "offset", "exponent", "max_iters", "window", "tol_gap", "mu_max"});
  if (j.contains("a0")) s.a0 = as_number(j["a0"], join(field, "a0"));
  if (j.contains("offset")) s.offset = as_number(j["offset"], join(field, "offset"));
  if (j.contains("exponent")) s.exponent = as_number(j["exponent"], join(field, "exponent"));
  if (j.contains("max_iters")) s.max_iters = static_cast<int>(as_integer(j["max_iters"], join(field, "max_iters")));
  if (j.contains("window")) s.window = static_cast<int>(as_integer(j["window"], join(field, "window")));
  if (j.contains("tol_gap")) s.tol_gap = as_number(j["tol_gap"], join(field, "tol_gap"));
  if (j.contains("mu_max")) s.mu_max = as_number(j["mu_max"], join(field, "mu_max"));
  if (s.a0 <= 0.0) throw ConfigError(join(field, "a0"), "must be positive");
  if (s.exponent <= 0.5 || s.exponent > 1.0) throw ConfigError(join(field, "exponent"), "must lie in (0.5, 1]");
  if (s.max_iters < 1) throw ConfigError(join(field, "max_iters"), "must be >= 1");
  if (s.window < 1) throw ConfigError(join(field, "window"), "must be >= 1");
}

void read_tuner(const json& j, const std::string& field, TunerSchedule& s, int& starts) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  reject_unknown(j, field, {"g0", "exponent", "max_iters", "r_min", "r_max", "tol_grad", "starts", "dual"});
  if (j.contains("g0")) s.g0 = as_number(j["g0"], join(field, "g0"));
  if (j.contains("exponent")) s.exponent = as_number(j["exponent"], join(field, "exponent"));
  if (j.contains("max_iters")) s.max_iters = static_cast<int>(as_integer(j["max_iters"], join(field, "max_iters")));
  if (j.contains("r_min")) s.r_min = as_number(j["r_min"], join(field, "r_min"));
  if (j.contains("r_max")) s.r_max = as_number(j["r_max"], join(field, "r_max"));
  if (j.contains("tol_grad")) s.tol_grad = as_number(j["tol_grad"], join(field, "tol_grad"));
  if (j.contains("starts")) starts = static_cast<int>(as_integer(j["starts"], join(field, "starts")));
  if (j.contains("dual")) read_dual(j["dual"], join(field, "dual"), s.dual);
  if (s.g0 <= 0.0) throw ConfigError(join(field, "g0"), "must be positive");
  if (s.max_iters < 1) throw ConfigError(join(field, "max_iters"), "must be >= 1");
  if (!(s.r_min > 0.0 && s.r_min < s.r_max)) throw ConfigError(join(field, "r_min"), "need 0 < r_min < r_max");
  if (starts < 1) throw ConfigError(join(field, "starts"), "must be >= 1");
}

void read_learner(const json& j, const std::string& field, LearnerConfig& c) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  reject_unknown(j, field, {"horizon", "eval_horizon", "alpha0", "alpha_exp", "beta0", "beta_exp", "gamma0",
                            "gamma_exp", "per_entry_alpha", "age_cap", "epsilon_floor", "access_smoothing",
                            "trace_every", "learn_prices", "learn_aggression"});
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = as_number(j[key], join(field, key));
  };
  auto flag = [&](const char* key, bool& out) {
    if (j.contains(key)) out = as_bool(j[key], join(field, key));
  };
  if (j.contains("horizon")) c.horizon = as_integer(j["horizon"], join(field, "horizon"));
  if (j.contains("eval_horizon")) c.eval_horizon = as_integer(j["eval_horizon"], join(field, "eval_horizon"));
  if (j.contains("age_cap")) c.age_cap = static_cast<int>(as_integer(j["age_cap"], join(field, "age_cap")));
  if (j.contains("trace_every")) c.trace_every = as_integer(j["trace_every"], join(field, "trace_every"));
  num("alpha0", c.steps.alpha0);
  num("alpha_exp", c.steps.alpha_exp);
  num("beta0", c.steps.beta0);
  num("beta_exp", c.steps.beta_exp);
  num("gamma0", c.steps.gamma0);
  num("gamma_exp", c.steps.gamma_exp);
  num("epsilon_floor", c.epsilon_floor);
  num("access_smoothing", c.access_smoothing);
  flag("per_entry_alpha", c.per_entry_alpha);
  flag("learn_prices", c.learn_prices);
  flag("learn_aggression", c.learn_aggression);
  if (c.horizon < 1) throw ConfigError(join(field, "horizon"), "must be >= 1");
  if (c.eval_horizon < 1) throw ConfigError(join(field, "eval_horizon"), "must be >= 1");
  if (c.epsilon_floor < 0.0 || c.epsilon_floor > 1.0) throw ConfigError(join(field, "epsilon_floor"), "must lie in [0, 1]");
  if (c.access_smoothing <= 0.0 || c.access_smoothing > 1.0) {
    throw ConfigError(join(field, "access_smoothing"), "must lie in (0, 1]");
  }
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kOptimal: return "optimal";
    case PolicyKind::kQcsma: return "qcsma-edf-sp";
    case PolicyKind::kLearned: return "learned";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name, const std::string& field) {
  if (name == "optimal") return PolicyKind::kOptimal;
  if (name == "qcsma-edf-sp") return PolicyKind::kQcsma;
  if (name == "learned") return PolicyKind::kLearned;
  throw ConfigError(field, "unknown policy '" + name + "' (optimal | qcsma-edf-sp | learned)");
}

NetworkSpec parse_network(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  reject_unknown(j, field, {"nodes", "links", "interference"});
  const json& nodes = require(j, "nodes", field);
  if (!nodes.is_array() || nodes.empty()) throw ConfigError(join(field, "nodes"), "expected a non-empty list");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < nodes.size(); ++i) names.push_back(as_string(nodes[i], index(join(field, "nodes"), i)));

  const json& links = require(j, "links", field);
  if (!links.is_array()) throw ConfigError(join(field, "links"), "expected a list");
  std::vector<LinkSpec> specs;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string lf = index(join(field, "links"), i);
    const json& l = links[i];
    if (!l.is_object()) throw ConfigError(lf, "expected an object");
    reject_unknown(l, lf, {"src", "dst", "reliability", "rate"});
    LinkSpec s;
    s.src = node_ref(require(l, "src", lf), names, join(lf, "src"));
    s.dst = node_ref(require(l, "dst", lf), names, join(lf, "dst"));
    s.reliability = as_number(require(l, "reliability", lf), join(lf, "reliability"));
    if (l.contains("rate")) s.rate = static_cast<int>(as_integer(l["rate"], join(lf, "rate")));
    specs.push_back(s);
  }

  const std::string inf_field = join(field, "interference");
  const json inf = j.value("interference", json("node-sharing"));
  if (inf.is_string()) {
    const auto mode = inf.get<std::string>();
    NetworkSpec bare(names, specs);
    if (mode == "node-sharing") return build_interference_from_node_sharing(bare);
    if (mode == "none") return bare;
    throw ConfigError(inf_field, "expected \"node-sharing\", \"none\" or a list of link pairs");
  }
  if (!inf.is_array()) throw ConfigError(inf_field, "expected \"node-sharing\", \"none\" or a list of link pairs");
  std::vector<InterferenceEdge> edges;
  for (std::size_t i = 0; i < inf.size(); ++i) {
    const std::string ef = index(inf_field, i);
    if (!inf[i].is_array() || inf[i].size() != 2) throw ConfigError(ef, "expected a pair of link indices");
    edges.emplace_back(static_cast<LinkId>(as_integer(inf[i][0], index(ef, 0))),
                       static_cast<LinkId>(as_integer(inf[i][1], index(ef, 1))));
  }
  return NetworkSpec(names, specs, edges);
}

NetworkSpec load_network_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("network", "cannot open network file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("network", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_network(j, "network");
}

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  reject_unknown(j, "", {"network", "flows", "deadline", "scale", "horizon", "seeds", "policies", "caps",
                         "aggression", "dual", "tuner", "learner", "qcsma", "enforce_capacity", "output_dir"});
  ExperimentConfig c;
  c.raw = j;
  c.base_dir = base_dir;

  const json& net = require(j, "network", "");
  if (net.is_string()) {
    c.network_source = net.get<std::string>();
    std::filesystem::path p(c.network_source);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw ConfigError("network", "network file not found: '" + p.string() + "'");
    c.network = load_network_file(p);
  } else {
    c.network_source = "inline";
    c.network = parse_network(net, "network");
  }

  const json& flows = require(j, "flows", "");
  if (!flows.is_array() || flows.empty()) throw ConfigError("flows", "expected a non-empty list");
  const std::vector<std::string> names(c.network.node_names().begin(), c.network.node_names().end());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const std::string ff = index("flows", i);
    const json& f = flows[i];
    if (!f.is_object()) throw ConfigError(ff, "expected an object");
    reject_unknown(f, ff, {"source", "destination", "weight", "arrival_rate"});
    FlowSpec s;
    s.source = node_ref(require(f, "source", ff), names, join(ff, "source"));
    s.destination = node_ref(require(f, "destination", ff), names, join(ff, "destination"));
    if (f.contains("weight")) s.weight = as_number(f["weight"], join(ff, "weight"));
    s.arrival_rate = as_number(require(f, "arrival_rate", ff), join(ff, "arrival_rate"));
    c.network.validate_flow(s, ff);
    c.flows.push_back(s);
  }

  auto positive_int = [](const json& v, const std::string& f) {
    const auto x = as_integer(v, f);
    if (x < 1) throw ConfigError(f, "must be >= 1");
    return static_cast<int>(x);
  };
  if (j.contains("deadline")) c.deadlines = scalar_or_list<int>(j["deadline"], "deadline", positive_int);
  if (j.contains("scale")) c.scales = scalar_or_list<int>(j["scale"], "scale", positive_int);
  if (j.contains("horizon")) {
    c.horizon = as_integer(j["horizon"], "horizon");
    if (c.horizon < 1) throw ConfigError("horizon", "must be >= 1");
  }
  if (j.contains("seeds")) {
    c.seeds = scalar_or_list<std::uint64_t>(j["seeds"], "seeds", [](const json& v, const std::string& f) {
      const auto x = as_integer(v, f);
      if (x < 0) throw ConfigError(f, "must be >= 0");
      return static_cast<std::uint64_t>(x);
    });
  }
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw ConfigError("seeds", "seeds must be distinct");
  }
  if (j.contains("policies")) {
    c.policies = scalar_or_list<PolicyKind>(j["policies"], "policies", [](const json& v, const std::string& f) {
      return parse_policy(as_string(v, f), f);
    });
  }

  const std::size_t L = c.network.num_links();
  if (j.contains("caps")) {
    c.caps = number_list(j["caps"], "caps");
    if (c.caps->size() != L) throw ConfigError("caps", "expected one cap per link (" + std::to_string(L) + ")");
    for (std::size_t l = 0; l < L; ++l) {
      if ((*c.caps)[l] < 0.0) throw ConfigError(index("caps", l), "must be >= 0");
    }
  }
  if (j.contains("aggression")) {
    const json& a = j["aggression"];
    if (!(a.is_string() && a.get<std::string>() == "tuned")) {
      c.aggression = number_list(a, "aggression");
      if (c.aggression->size() != L) {
        throw ConfigError("aggression", "expected \"tuned\" or one value per link (" + std::to_string(L) + ")");
      }
      for (std::size_t l = 0; l < L; ++l) {
        if ((*c.aggression)[l] <= 0.0) throw ConfigError(index("aggression", l), "must be > 0");
      }
    }
  }
  if (j.contains("dual")) read_dual(j["dual"], "dual", c.dual);
  if (j.contains("tuner")) read_tuner(j["tuner"], "tuner", c.tuner, c.tuner_starts);
  c.tuner.record_trace = true;
  if (j.contains("learner")) read_learner(j["learner"], "learner", c.learner);
  if (j.contains("qcsma")) {
    const json& q = j["qcsma"];
    if (!q.is_object()) throw ConfigError("qcsma", "expected an object");
    reject_unknown(q, "qcsma", {"window", "carryover"});
    if (q.contains("window")) c.qcsma_window = positive_int(q["window"], "qcsma.window");
    if (q.contains("carryover")) c.qcsma_carryover = as_bool(q["carryover"], "qcsma.carryover");
  }
  if (j.contains("enforce_capacity")) c.enforce_capacity = as_bool(j["enforce_capacity"], "enforce_capacity");
  if (j.contains("output_dir")) {
    std::filesystem::path p(as_string(j["output_dir"], "output_dir"));
    c.output_dir = p.is_relative() ? base_dir / p : p;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw ConfigError("--seeds", "bad seed '" + std::string(s) + "'");
    }
    return v;
  };
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(number(item));
    } else {
      const auto lo = number(item.substr(0, dash));
      const auto hi = number(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("--seeds", "empty range '" + std::string(item) + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("--seeds", "no seeds given");
  if (std::set<std::uint64_t>(out.begin(), out.end()).size() != out.size()) {
    throw ConfigError("--seeds", "seeds must be distinct");
  }
  return out;
}

}  // namespace timely::harness
