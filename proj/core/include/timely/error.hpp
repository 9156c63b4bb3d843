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

#include <stdexcept>
#include <string>

namespace timely {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A network, flow, or experiment definition is malformed. `field()` names
/// the offending entry (e.g. "links[3].reliability").
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Maximal independent set enumeration was asked to run on a graph above the
/// configured link cap.
class GraphTooLarge : public Error {
 public:
  GraphTooLarge(std::size_t links, std::size_t cap)
      : Error("interference graph has " + std::to_string(links) +
              " links; enumeration cap is " + std::to_string(cap)),
        links_(links),
        cap_(cap) {}

  std::size_t links() const noexcept { return links_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t links_;
  std::size_t cap_;
};

}  // namespace timely
