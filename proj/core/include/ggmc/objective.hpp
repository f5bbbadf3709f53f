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

#ifndef GGMC_OBJECTIVE_HPP
#define GGMC_OBJECTIVE_HPP

#include <array>
#include <span>
#include <vector>

#include "ggmc/common.hpp"
#include "ggmc/grid.hpp"

namespace ggmc {

// Observed entries of one block in block-local coordinates. Entries are kept
// sorted by (row, col) so every reduction over them has a canonical order.
class BlockData {
 public:
  BlockData() = default;
  // Throws InvalidArgument on out-of-range or duplicate coordinates.
  BlockData(BlockId id, Index rows, Index cols, std::vector<RatingTriple> entries);

  BlockId id() const noexcept { return id_; }
  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  std::span<const RatingTriple> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  BlockId id_;
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<RatingTriple> entries_;
};

// The observed matrix cut along a grid: one BlockData per cell, row-major.
class PartitionedData {
 public:
  PartitionedData() = default;
  // Triples carry global indices; throws InvalidArgument if any falls
  // outside the grid or a coordinate repeats.
  PartitionedData(const GridSpec& grid, std::span<const RatingTriple> triples);
  PartitionedData(GridSpec grid, std::vector<BlockData> blocks);

  const GridSpec& grid() const noexcept { return grid_; }
  const BlockData& at(BlockId id) const { return blocks_.at(grid_.linearIndex(id)); }
  const std::vector<BlockData>& blocks() const noexcept { return blocks_; }
  std::size_t entryCount() const noexcept;

 private:
  GridSpec grid_;
  std::vector<BlockData> blocks_;
};

// Local factors of one block: X_ij ~ U * W^T, U is rows x r, W is cols x r.
struct FactorPair {
  Matrix u;
  Matrix w;
};

class FactorState {
 public:
  FactorState() = default;
  // Zero-initialised factors of the right shapes.
  FactorState(GridSpec grid, Index rank);

  const GridSpec& grid() const noexcept { return grid_; }
  Index rank() const noexcept { return rank_; }
  FactorPair& at(BlockId id) { return pairs_.at(grid_.linearIndex(id)); }
  const FactorPair& at(BlockId id) const { return pairs_.at(grid_.linearIndex(id)); }
  std::vector<FactorPair>& pairs() noexcept { return pairs_; }
  const std::vector<FactorPair>& pairs() const noexcept { return pairs_; }

  // Bitwise equality of every factor entry.
  friend bool operator==(const FactorState& a, const FactorState& b);

 private:
  GridSpec grid_;
  Index rank_ = 0;
  std::vector<FactorPair> pairs_;
};

// The data and factors of a structure's three members, in members() order.
// Lets the same cost/gradient code run on a full FactorState or on the
// copies a gossiping agent holds.
struct StructureOperands {
  std::array<const BlockData*, 3> data{};
  std::array<const FactorPair*, 3> factors{};
};

StructureOperands operandsOf(const Structure& s, const FactorState& state, const PartitionedData& data);

// d/dU and d/dW for each member, in members() order.
struct StructureGradient {
  std::array<FactorPair, 3> members;
};

// Masked squared reconstruction error: sum over observed (k,l) of
// (x_kl - <U_k, W_l>)^2.
double fCost(const BlockData& block, const FactorPair& pair);

// ||a - b||_F^2 between neighbouring factors.
double dCostU(const Matrix& a, const Matrix& b);
double dCostW(const Matrix& a, const Matrix& b);

// Normalised structure cost:
//   cf0*f0 + cf1*f1 + cf2*f2 + rho*cU*dU(U0,U2) + rho*cW*dW(W0,W1)
// accumulated left to right, where cfk = fCoeff of member k and cU/cW are
// the pivot's consensus coefficients.
double structureCost(const Structure& s, const StructureOperands& ops, double rho, const NormalizationTable& norm);
double structureCost(const Structure& s, const FactorState& state, const PartitionedData& data, double rho,
                     const NormalizationTable& norm);

// structureCost plus lambda * sum_k cfk * (||Uk||^2 + ||Wk||^2). This is the
// per-structure term whose gradient drives one update; summed over every
// valid structure it equals globalObjective.
double structureObjective(const Structure& s, const StructureOperands& ops, double rho, double lambda,
                          const NormalizationTable& norm);

// Sum of structureCost over enumerateStructures (in that order), plus
// lambda times the block-row-major sum of ||U_ij||^2 + ||W_ij||^2.
double globalObjective(const FactorState& state, const PartitionedData& data, double rho, double lambda,
                       const NormalizationTable& norm);

// Unnormalised sum of f over blocks plus lambda times the factor norms, both
// accumulated block-row-major: fSum + lambda * regSum.
double trainingCost(const FactorState& state, const PartitionedData& data, double lambda);

// Analytic gradient of structureObjective with respect to each member's U, W.
StructureGradient structureGradient(const Structure& s, const StructureOperands& ops, double rho, double lambda,
                                    const NormalizationTable& norm);
StructureGradient structureGradient(const Structure& s, const FactorState& state, const PartitionedData& data,
                                    double rho, double lambda, const NormalizationTable& norm);

}  // namespace ggmc

#endif  // GGMC_OBJECTIVE_HPP
