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

#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "timely/error.hpp"
#include "timely/network.hpp"
#include "timely/rng.hpp"

using namespace timely;

TEST_SUITE("network") {

TEST_CASE("disjoint links share no interference edge") {
  const auto net = build_interference_from_node_sharing(NetworkSpec({"1", "2", "3", "4"}, {{0, 1, 1.0, 1}, {2, 3, 1.0, 1}}));
  CHECK(net.interference_edges().empty());
}

TEST_CASE("links sharing a node interfere") {
  const auto net = build_interference_from_node_sharing(NetworkSpec({"1", "2", "3"}, {{0, 1, 1.0, 1}, {1, 2, 1.0, 1}}));
  const auto edges = net.interference_edges();
  REQUIRE(edges.size() == 1);
  CHECK(edges[0] == InterferenceEdge{0, 1});
  CHECK(net.interferes(1, 0));
  CHECK_FALSE(net.interferes(0, 0));
}

TEST_CASE("validation names the offending field") {
  auto field_of = [](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of([] { NetworkSpec({"a", "b"}, {{0, 0, 0.5, 1}}); }) == "links[0].dst");
  CHECK(field_of([] { NetworkSpec({"a", "b"}, {{0, 1, 1.5, 1}}); }) == "links[0].reliability");
  CHECK(field_of([] { NetworkSpec({"a", "b"}, {{0, 1, 0.5, 0}}); }) == "links[0].rate");
  CHECK(field_of([] { NetworkSpec({"a", "b"}, {{0, 3, 0.5, 1}}); }) == "links[0].dst");
  CHECK(field_of([] { NetworkSpec({"a", "b"}, {{0, 1, 0.5, 1}}, {{0, 0}}); }) == "interference[0]");
  CHECK(field_of([] { NetworkSpec({"a", "a"}, {}); }) == "nodes[1]");
  const NetworkSpec ok({"a", "b"}, {{0, 1, 0.5, 1}});
  CHECK(field_of([&] { ok.validate_flow({0, 0, 1.0, 0.5}, "flows[1]"); }) == "flows[1].destination");
  CHECK(field_of([&] { ok.validate_flow({0, 1, -1.0, 0.5}); }) == "flow.weight");
  CHECK(field_of([&] { ok.validate_flow({0, 1, 1.0, 1.5}); }) == "flow.arrival_rate");
}

TEST_CASE("maximal independent sets on small graphs") {
  // path a-b-c in the conflict graph
  const NetworkSpec path({"1", "2", "3", "4", "5", "6"}, {{0, 1, 1, 1}, {2, 3, 1, 1}, {4, 5, 1, 1}}, {{0, 1}, {1, 2}});
  CHECK(enumerate_maximal_independent_sets(path).sets == std::vector<std::vector<LinkId>>{{0, 2}, {1}});
  const auto tri = testing::clique(3);
  CHECK(enumerate_maximal_independent_sets(tri).sets == std::vector<std::vector<LinkId>>{{0}, {1}, {2}});
  const NetworkSpec empty({"1", "2", "3", "4", "5", "6"}, {{0, 1, 1, 1}, {2, 3, 1, 1}, {4, 5, 1, 1}});
  const auto fam = enumerate_maximal_independent_sets(empty);
  CHECK(fam.sets == std::vector<std::vector<LinkId>>{{0, 1, 2}});
  CHECK(fam.index[2] == std::vector<int>{0});
}

TEST_CASE("family equals brute force on random graphs") {
  Stream rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t L = 1 + rng.below(10);
    std::vector<std::string> names;
    std::vector<LinkSpec> links;
    std::vector<InterferenceEdge> edges;
    for (std::size_t i = 0; i < L; ++i) {
      names.push_back("a" + std::to_string(i));
      names.push_back("b" + std::to_string(i));
      links.push_back({static_cast<int>(2 * i), static_cast<int>(2 * i + 1), 1.0, 1});
      for (std::size_t j = 0; j < i; ++j) {
        if (rng.bernoulli(0.4)) edges.emplace_back(static_cast<int>(j), static_cast<int>(i));
      }
    }
    const NetworkSpec net(names, links, edges);
    const auto fam = enumerate_maximal_independent_sets(net);
    REQUIRE(fam.sets == oracle::brute_force_mis(net));
    for (const auto& s : fam.sets) CHECK(is_maximal_independent(net, s));
    for (std::size_t m = 0; m < fam.sets.size(); ++m) {
      for (LinkId l : fam.sets[m]) {
        const auto& idx = fam.index[static_cast<std::size_t>(l)];
        CHECK(std::find(idx.begin(), idx.end(), static_cast<int>(m)) != idx.end());
      }
    }
  }
}

TEST_CASE("enumeration refuses graphs above the cap") {
  CHECK_THROWS_AS(enumerate_maximal_independent_sets(testing::clique(6), 5), GraphTooLarge);
}

TEST_CASE("interference is symmetric and irreflexive after node sharing") {
  Stream rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_instance(rng, 4, 3);
    const auto& net = inst.net;
    for (std::size_t a = 0; a < net.num_links(); ++a) {
      CHECK_FALSE(net.interferes(static_cast<LinkId>(a), static_cast<LinkId>(a)));
      for (std::size_t b = 0; b < net.num_links(); ++b) {
        const auto& la = net.link(static_cast<LinkId>(a));
        const auto& lb = net.link(static_cast<LinkId>(b));
        const bool share = a != b && (la.src == lb.src || la.src == lb.dst || la.dst == lb.src || la.dst == lb.dst);
        CHECK(net.interferes(static_cast<LinkId>(a), static_cast<LinkId>(b)) == share);
      }
    }
  }
}

}
