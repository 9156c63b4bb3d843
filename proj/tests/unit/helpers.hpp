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

#include <string>
#include <vector>

#include "timely/network.hpp"

namespace testing {

inline timely::NetworkSpec single_link(double reliability, int rate = 1) {
  return timely::NetworkSpec({"s", "d"}, {{0, 1, reliability, rate}});
}

inline timely::NetworkSpec line(std::vector<double> reliabilities) {
  std::vector<std::string> names;
  std::vector<timely::LinkSpec> links;
  for (std::size_t i = 0; i <= reliabilities.size(); ++i) names.push_back("n" + std::to_string(i));
  for (std::size_t i = 0; i < reliabilities.size(); ++i) {
    links.push_back({static_cast<int>(i), static_cast<int>(i) + 1, reliabilities[i], 1});
  }
  return timely::build_interference_from_node_sharing(timely::NetworkSpec(names, links));
}

/// `n` disjoint links pairwise interfering (a complete conflict graph).
inline timely::NetworkSpec clique(std::size_t n) {
  std::vector<std::string> names;
  std::vector<timely::LinkSpec> links;
  std::vector<timely::InterferenceEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    names.push_back("a" + std::to_string(i));
    names.push_back("b" + std::to_string(i));
    links.push_back({static_cast<int>(2 * i), static_cast<int>(2 * i + 1), 1.0, 1});
    for (std::size_t j = 0; j < i; ++j) edges.emplace_back(static_cast<int>(j), static_cast<int>(i));
  }
  return timely::NetworkSpec(names, links, edges);
}

}  // namespace testing
