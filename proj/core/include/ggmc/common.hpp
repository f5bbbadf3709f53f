// Copyright 2026 The ggmc Authors. All Rights Reserved.
//
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

#ifndef GGMC_COMMON_HPP
#define GGMC_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ggmc {

using Index = std::ptrdiff_t;

// Factor matrices are stored row-major: one latent vector per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One observed matrix entry. Indices are global in a Dataset and
// block-local inside BlockData.
struct RatingTriple {
  Index row = 0;
  Index col = 0;
  double value = 0.0;

  friend bool operator==(const RatingTriple&, const RatingTriple&) = default;
};

// All stochastic components draw from this engine so runs are reproducible
// from a single seed.
using Rng = std::mt19937_64;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file. `line` is 1-based, 0 when not line-specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training left the basin: non-finite gradient or exploding cost.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gossip simulation invariant broken (non-adjacent message, stale round,
// write to a block the agent does not own).
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ggmc

#endif  // GGMC_COMMON_HPP
