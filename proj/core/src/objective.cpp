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

#include "ggmc/objective.hpp"

#include <algorithm>
#include <string>

namespace ggmc {

namespace {

void requireSameShape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}

void requireCompatible(const BlockData& block, const FactorPair& pair) {
  if (pair.u.rows() != block.rows() || pair.w.rows() != block.cols() || pair.u.cols() != pair.w.cols()) {
    throw InvalidArgument("factor shapes do not match block " + std::to_string(block.id().i) + "," +
                          std::to_string(block.id().j));
  }
}

void requireValid(const Structure& s, const NormalizationTable& norm) {
  for (BlockId id : s.members()) {
    if (id.i < 1 || id.i > norm.p || id.j < 1 || id.j > norm.q) {
      throw InvalidArgument("structure extends outside the grid");
    }
  }
}

// Adds -2*coeff*R*W to gu and -2*coeff*R^T*U to gw, R being the masked
// residual of the block.
void addReconstructionGradient(const BlockData& block, const FactorPair& pair, double coeff, FactorPair& grad) {
  for (const RatingTriple& e : block.entries()) {
    const double residual = e.value - pair.u.row(e.row).dot(pair.w.row(e.col));
    const double scale = -2.0 * coeff * residual;
    grad.u.row(e.row) += scale * pair.w.row(e.col);
    grad.w.row(e.col) += scale * pair.u.row(e.row);
  }
}

}  // namespace

BlockData::BlockData(BlockId id, Index rows, Index cols, std::vector<RatingTriple> entries)
    : id_(id), rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ < 1 || cols_ < 1) throw InvalidArgument("block dimensions must be positive");
  for (const RatingTriple& e : entries_) {
    if (e.row < 0 || e.row >= rows_ || e.col < 0 || e.col >= cols_) {
      throw InvalidArgument("entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                            ") outside block bounds");
    }
  }
  std::sort(entries_.begin(), entries_.end(), [](const RatingTriple& a, const RatingTriple& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(), [](const RatingTriple& a, const RatingTriple& b) {
    return a.row == b.row && a.col == b.col;
  });
  if (dup != entries_.end()) {
    throw InvalidArgument("duplicate entry (" + std::to_string(dup->row) + "," + std::to_string(dup->col) + ")");
  }
}

PartitionedData::PartitionedData(const GridSpec& grid, std::span<const RatingTriple> triples) : grid_(grid) {
  std::vector<std::vector<RatingTriple>> buckets(grid.blockCount());
  for (const RatingTriple& t : triples) {
    const BlockId id{grid.blockRowOf(t.row), grid.blockColOf(t.col)};
    buckets[grid.linearIndex(id)].push_back(
        {t.row - grid.rowRange(id.i).begin, t.col - grid.colRange(id.j).begin, t.value});
  }
  blocks_.reserve(grid.blockCount());
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    const BlockId id = grid.blockAt(k);
    blocks_.emplace_back(id, grid.rowRange(id.i).size(), grid.colRange(id.j).size(), std::move(buckets[k]));
  }
}

PartitionedData::PartitionedData(GridSpec grid, std::vector<BlockData> blocks)
    : grid_(std::move(grid)), blocks_(std::move(blocks)) {
  if (blocks_.size() != grid_.blockCount()) throw InvalidArgument("one BlockData per grid cell required");
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const BlockId id = grid_.blockAt(k);
    if (blocks_[k].id() != id || blocks_[k].rows() != grid_.rowRange(id.i).size() ||
        blocks_[k].cols() != grid_.colRange(id.j).size()) {
      throw InvalidArgument("block data does not match its grid cell");
    }
  }
}

std::size_t PartitionedData::entryCount() const noexcept {
  std::size_t total = 0;
  for (const BlockData& b : blocks_) total += b.size();
  return total;
}

FactorState::FactorState(GridSpec grid, Index rank) : grid_(std::move(grid)), rank_(rank) {
  if (rank_ < 1) throw InvalidArgument("rank must be at least 1");
  pairs_.reserve(grid_.blockCount());
  for (std::size_t k = 0; k < grid_.blockCount(); ++k) {
    const BlockId id = grid_.blockAt(k);
    pairs_.push_back({Matrix::Zero(grid_.rowRange(id.i).size(), rank_),
                      Matrix::Zero(grid_.colRange(id.j).size(), rank_)});
  }
}

bool operator==(const FactorState& a, const FactorState& b) {
  if (!(a.grid_ == b.grid_) || a.rank_ != b.rank_ || a.pairs_.size() != b.pairs_.size()) return false;
  for (std::size_t k = 0; k < a.pairs_.size(); ++k) {
    // Eigen's == is element-wise exact comparison.
    if (a.pairs_[k].u != b.pairs_[k].u || a.pairs_[k].w != b.pairs_[k].w) return false;
  }
  return true;
}

StructureOperands operandsOf(const Structure& s, const FactorState& state, const PartitionedData& data) {
  if (!s.validFor(state.grid())) throw InvalidArgument("structure is not valid for this grid");
  StructureOperands ops;
  for (std::size_t k = 0; k < 3; ++k) {
    ops.data[k] = &data.at(s.members()[k]);
    ops.factors[k] = &state.at(s.members()[k]);
  }
  return ops;
}

double fCost(const BlockData& block, const FactorPair& pair) {
  requireCompatible(block, pair);
  double total = 0.0;
  for (const RatingTriple& e : block.entries()) {
    const double residual = e.value - pair.u.row(e.row).dot(pair.w.row(e.col));
    total += residual * residual;
  }
  return total;
}

double dCostU(const Matrix& a, const Matrix& b) {
  requireSameShape(a, b, "dCostU");
  return (a - b).squaredNorm();
}

double dCostW(const Matrix& a, const Matrix& b) {
  requireSameShape(a, b, "dCostW");
  return (a - b).squaredNorm();
}

double structureCost(const Structure& s, const StructureOperands& ops, double rho, const NormalizationTable& norm) {
  requireValid(s, norm);
  const auto& mem = s.members();
  double total = norm.f(mem[0]) * fCost(*ops.data[0], *ops.factors[0]);
  total += norm.f(mem[1]) * fCost(*ops.data[1], *ops.factors[1]);
  total += norm.f(mem[2]) * fCost(*ops.data[2], *ops.factors[2]);
  total += rho * (norm.dU(mem[0]) * dCostU(ops.factors[0]->u, ops.factors[2]->u));
  total += rho * (norm.dW(mem[0]) * dCostW(ops.factors[0]->w, ops.factors[1]->w));
  return total;
}

double structureCost(const Structure& s, const FactorState& state, const PartitionedData& data, double rho,
                     const NormalizationTable& norm) {
  return structureCost(s, operandsOf(s, state, data), rho, norm);
}

double structureObjective(const Structure& s, const StructureOperands& ops, double rho, double lambda,
                          const NormalizationTable& norm) {
  double total = structureCost(s, ops, rho, norm);
  for (std::size_t k = 0; k < 3; ++k) {
    const FactorPair& f = *ops.factors[k];
    total += lambda * (norm.f(s.members()[k]) * (f.u.squaredNorm() + f.w.squaredNorm()));
  }
  return total;
}

double globalObjective(const FactorState& state, const PartitionedData& data, double rho, double lambda,
                       const NormalizationTable& norm) {
  double total = 0.0;
  for (const Structure& s : enumerateStructures(state.grid())) total += structureCost(s, state, data, rho, norm);
  double reg = 0.0;
  for (const FactorPair& f : state.pairs()) reg += f.u.squaredNorm() + f.w.squaredNorm();
  return total + lambda * reg;
}

double trainingCost(const FactorState& state, const PartitionedData& data, double lambda) {
  double fSum = 0.0;
  double reg = 0.0;
  for (std::size_t k = 0; k < state.pairs().size(); ++k) {
    const FactorPair& f = state.pairs()[k];
    fSum += fCost(data.blocks()[k], f);
    reg += f.u.squaredNorm() + f.w.squaredNorm();
  }
  return fSum + lambda * reg;
}

StructureGradient structureGradient(const Structure& s, const StructureOperands& ops, double rho, double lambda,
                                    const NormalizationTable& norm) {
  requireValid(s, norm);
  const auto& mem = s.members();
  StructureGradient g;
  for (std::size_t k = 0; k < 3; ++k) {
    const FactorPair& f = *ops.factors[k];
    requireCompatible(*ops.data[k], f);
    const double coeff = norm.f(mem[k]);
    g.members[k].u = (2.0 * lambda * coeff) * f.u;
    g.members[k].w = (2.0 * lambda * coeff) * f.w;
    addReconstructionGradient(*ops.data[k], f, coeff, g.members[k]);
  }

  requireSameShape(ops.factors[0]->u, ops.factors[2]->u, "U consensus");
  const Matrix du = (2.0 * rho * norm.dU(mem[0])) * (ops.factors[0]->u - ops.factors[2]->u);
  g.members[0].u += du;
  g.members[2].u -= du;

  requireSameShape(ops.factors[0]->w, ops.factors[1]->w, "W consensus");
  const Matrix dw = (2.0 * rho * norm.dW(mem[0])) * (ops.factors[0]->w - ops.factors[1]->w);
  g.members[0].w += dw;
  g.members[1].w -= dw;
  return g;
}

StructureGradient structureGradient(const Structure& s, const FactorState& state, const PartitionedData& data,
                                    double rho, double lambda, const NormalizationTable& norm) {
  return structureGradient(s, operandsOf(s, state, data), rho, lambda, norm);
}

}  // namespace ggmc
